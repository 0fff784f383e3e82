#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <filesystem>

#include "hotdist/bundle_io.hpp"
#include "hotdist/oracle.hpp"
#include "hotdist/rng.hpp"
#include "hotdist/synth.hpp"
#include "hotdist/targets.hpp"

using namespace hotdist;
namespace fs = std::filesystem;

namespace {

ClassSchema mito_nucleus_schema() {
    ClassSchema schema;
    schema.classes = {{0, "background"}, {1, "mito"}, {2, "nucleus"}};
    schema.exclusivity_groups = {{1, 2}};
    return schema;
}

/// Mito positives, nucleus hidden behind the unknown label, no background
/// labels: the classic partially annotated crop.
LabelVolume sparse_mito_crop() {
    LabelVolume lv;
    lv.volume = Volume<std::uint32_t>(Shape3{4, 4, 4}, Spacing3{1, 1, 1}, kUnknownLabel);
    lv.schema = mito_nucleus_schema();
    lv.meta.annotated_classes = {1};
    lv.meta.closed_world = false;
    lv.volume.at(1, 1, 1) = 1;
    lv.volume.at(1, 1, 2) = 1;
    lv.volume.at(2, 2, 2) = 1;
    return lv;
}

std::size_t channel_of(const std::vector<std::uint32_t>& ids, std::uint32_t id) {
    for (std::size_t k = 0; k < ids.size(); ++k) {
        if (ids[k] == id) return k;
    }
    REQUIRE(false);
    return 0;
}

i64 mask_sum(const Volume<std::uint8_t>& mask) {
    i64 n = 0;
    for (auto v : mask.data) n += v;
    return n;
}

LabelVolume random_dense_crop(SplitMix64& rng, i64 side, Spacing3 spacing) {
    ClassSchema schema = mito_nucleus_schema();
    std::vector<SphereSpec> spheres;
    const int count = 1 + static_cast<int>(rng.next_below(3));
    for (int s = 0; s < count; ++s) {
        const double extent_z = static_cast<double>(side - 1) * spacing.z;
        const double extent_y = static_cast<double>(side - 1) * spacing.y;
        const double extent_x = static_cast<double>(side - 1) * spacing.x;
        spheres.push_back({rng.next_in(0.0, extent_z), rng.next_in(0.0, extent_y),
                           rng.next_in(0.0, extent_x), rng.next_in(0.8, 2.5) * spacing.min(),
                           static_cast<std::uint32_t>(1 + rng.next_below(2))});
    }
    // Same-group overlaps are rejected; fall back to a single sphere.
    try {
        return gen_spheres(Shape3{side, side, side}, spacing, spheres, schema);
    } catch (const Error&) {
        spheres.resize(1);
        return gen_spheres(Shape3{side, side, side}, spacing, spheres, schema);
    }
}

}  // namespace

TEST_CASE("hot_targets: exclusivity gives true negatives for the hidden class") {
    LabelVolume lv = sparse_mito_crop();
    HotTargets t = hot_targets(lv);

    const auto nucleus = channel_of(t.class_ids, 2);
    const auto mito = channel_of(t.class_ids, 1);
    const auto background = channel_of(t.class_ids, 0);

    for (i64 i = 0; i < lv.volume.voxels(); ++i) {
        const bool is_mito = lv.volume[i] == 1;
        // Nucleus channel: known (and negative) exactly at mito positives.
        CHECK(t.mask[nucleus][i] == (is_mito ? 1 : 0));
        if (is_mito) CHECK(t.hot[nucleus][i] == 0.0f);
        // Mito is densely annotated: mask everywhere, hot where labeled.
        CHECK(t.mask[mito][i] == 1);
        CHECK(t.hot[mito][i] == (is_mito ? 1.0f : 0.0f));
        // Background is neither annotated nor exclusive with mito.
        CHECK(t.mask[background][i] == 0);
    }
}

TEST_CASE("hot_targets: fully dense crop has all-ones masks") {
    LabelVolume lv = sparse_mito_crop();
    lv.meta.annotated_classes = {0, 1, 2};
    for (auto& v : lv.volume.data) {
        if (v == kUnknownLabel) v = 0;
    }
    HotTargets t = hot_targets(lv);
    for (const auto& mask : t.mask) {
        CHECK(mask_sum(mask) == lv.volume.voxels());
    }
}

TEST_CASE("hot_targets: unknown voxel with no information has zero mask everywhere") {
    LabelVolume lv;
    lv.volume = Volume<std::uint32_t>(Shape3{1, 1, 1}, Spacing3{1, 1, 1}, kUnknownLabel);
    lv.schema = mito_nucleus_schema();
    HotTargets t = hot_targets(lv);
    for (const auto& mask : t.mask) CHECK(mask[0] == 0);
}

TEST_CASE("hot_targets mask rule matches brute-force case analysis") {
    SplitMix64 rng(0x4077);
    for (int trial = 0; trial < 40; ++trial) {
        ClassSchema schema = mito_nucleus_schema();
        LabelVolume lv;
        lv.volume = Volume<std::uint32_t>(Shape3{3, 3, 3}, Spacing3{1, 1, 1});
        for (auto& v : lv.volume.data) {
            const auto r = rng.next_below(4);
            v = r == 3 ? kUnknownLabel : static_cast<std::uint32_t>(r);
        }
        lv.schema = schema;
        if (rng.next_bool(0.5)) lv.meta.annotated_classes.insert(0);
        if (rng.next_bool(0.5)) lv.meta.annotated_classes.insert(1);
        if (rng.next_bool(0.5)) lv.meta.annotated_classes.insert(2);

        HotTargets t = hot_targets(lv);
        for (std::size_t k = 0; k < t.class_ids.size(); ++k) {
            const std::uint32_t c = t.class_ids[k];
            for (i64 i = 0; i < lv.volume.voxels(); ++i) {
                const std::uint32_t label = lv.volume[i];
                // Truth table, spelled out independently of the implementation:
                // membership is determined iff the voxel is labeled c, or c is
                // densely annotated, or the label is exclusive with c.
                const bool known_positive = label == c;
                bool known_negative = false;
                if (!known_positive) {
                    if (lv.meta.annotated_classes.count(c)) known_negative = true;
                    if ((c == 1 && label == 2) || (c == 2 && label == 1)) known_negative = true;
                }
                if (known_positive) {
                    CHECK(t.mask[k][i] == 1);
                    CHECK(t.hot[k][i] == 1.0f);
                } else if (known_negative) {
                    CHECK(t.mask[k][i] == 1);
                    CHECK(t.hot[k][i] == 0.0f);
                } else {
                    CHECK(t.mask[k][i] == 0);
                }
            }
        }
    }
}

TEST_CASE("distance_targets: sparse class gets an all-zero mask and channel") {
    LabelVolume lv = sparse_mito_crop();
    DistanceTargets d = distance_targets(lv, DistanceParams{2.0, false});
    const auto nucleus = channel_of(d.class_ids, 2);
    CHECK(mask_sum(d.mask[nucleus]) == 0);
    for (i64 i = 0; i < lv.volume.voxels(); ++i) CHECK(d.dist[nucleus][i] == 0.0f);

    const auto mito = channel_of(d.class_ids, 1);
    CHECK(mask_sum(d.mask[mito]) == lv.volume.voxels());  // border masking off
}

TEST_CASE("distance_targets: closed world disables border masking") {
    LabelVolume lv = sparse_mito_crop();
    lv.meta.closed_world = true;
    DistanceTargets d = distance_targets(lv, DistanceParams{2.0, true});
    const auto mito = channel_of(d.class_ids, 1);
    CHECK(mask_sum(d.mask[mito]) == lv.volume.voxels());
}

TEST_CASE("distance_targets: corner-site crop masks far voxels under the border rule") {
    LabelVolume lv;
    lv.volume = Volume<std::uint32_t>(Shape3{8, 8, 8}, Spacing3{1, 1, 1}, 0);
    lv.schema.classes = {{0, "background"}, {1, "mito"}};
    lv.volume.at(0, 0, 0) = 1;
    lv.meta.annotated_classes = {0, 1};
    lv.meta.closed_world = false;

    DistanceTargets d = distance_targets(lv, DistanceParams{4.0, true});
    const auto mito = channel_of(d.class_ids, 1);

    // (0,0,7): raw distance -7 but the voxel sits on crop faces (border 0).
    CHECK(d.mask[mito][lv.volume.index(0, 0, 7)] == 0);
    // The site itself touches three faces: |+1| > 0.
    CHECK(d.mask[mito][lv.volume.index(0, 0, 0)] == 0);
    // (1,1,1): |d| = sqrt(3) > 1 = face distance.
    CHECK(d.mask[mito][lv.volume.index(1, 1, 1)] == 0);
    // With the only site in the corner, every in-crop distance outruns the
    // voxel's face distance: the whole channel is masked out.
    CHECK(mask_sum(d.mask[mito]) == 0);
}

TEST_CASE("distance_targets: center-site crop keeps a core and masks the rim") {
    LabelVolume lv;
    lv.volume = Volume<std::uint32_t>(Shape3{9, 9, 9}, Spacing3{1, 1, 1}, 0);
    lv.schema.classes = {{0, "background"}, {1, "mito"}};
    lv.volume.at(4, 4, 4) = 1;
    lv.meta.annotated_classes = {0, 1};
    lv.meta.closed_world = false;

    DistanceTargets d = distance_targets(lv, DistanceParams{4.0, true});
    const auto mito = channel_of(d.class_ids, 1);

    CHECK(d.mask[mito][lv.volume.index(4, 4, 4)] == 1);  // |+1| <= border 4
    CHECK(d.mask[mito][lv.volume.index(4, 4, 5)] == 1);  // |-1| <= border 3
    CHECK(d.mask[mito][lv.volume.index(4, 4, 6)] == 1);  // |-2| == border 2: tie stays in
    CHECK(d.mask[mito][lv.volume.index(4, 4, 7)] == 0);  // |-3| > border 1
    CHECK(d.mask[mito][lv.volume.index(0, 4, 4)] == 0);  // |-4| > border 0
    CHECK(mask_sum(d.mask[mito]) > 0);
}

TEST_CASE("border masking is sound against adversarial outside objects") {
    // Embed random open-world crops in a larger volume with a plate of
    // either phase just beyond each face; masked-in voxels must keep their
    // exact distances regardless of the adversary.
    SplitMix64 rng(0xb0bd);
    i64 masked_in_total = 0;
    for (int trial = 0; trial < 8; ++trial) {
        const Shape3 shape{6, 6, 6};
        LabelVolume lv;
        lv.volume = Volume<std::uint32_t>(shape, Spacing3{1, 1, 1}, 0);
        lv.schema.classes = {{0, "background"}, {1, "mito"}};
        lv.meta.annotated_classes = {0, 1};
        lv.meta.closed_world = false;
        bool any = false;
        for (auto& v : lv.volume.data) {
            if (rng.next_bool(0.25)) {
                v = 1;
                any = true;
            }
        }
        if (!any) lv.volume[static_cast<i64>(rng.next_below(216))] = 1;

        DistanceTargets d = distance_targets(lv, DistanceParams{3.0, true});
        const auto mito = channel_of(d.class_ids, 1);

        Volume<std::uint8_t> indicator(shape, Spacing3{1, 1, 1});
        for (i64 i = 0; i < shape.voxels(); ++i) indicator[i] = lv.volume[i] == 1;
        auto crop_to_fg = brute_edt(indicator);
        Volume<std::uint8_t> complement = indicator;
        for (auto& v : complement.data) v = v ? 0 : 1;
        auto crop_to_bg = brute_edt(complement);

        for (int face = 0; face < 6; ++face) {
            const int axis = face / 2;
            const bool low_side = face % 2 == 0;
            const Shape3 big{shape.z + (axis == 0), shape.y + (axis == 1), shape.x + (axis == 2)};
            const i64 off_z = (axis == 0 && low_side) ? 1 : 0;
            const i64 off_y = (axis == 1 && low_side) ? 1 : 0;
            const i64 off_x = (axis == 2 && low_side) ? 1 : 0;

            for (int adversary_fg = 0; adversary_fg <= 1; ++adversary_fg) {
                Volume<std::uint8_t> big_ind(big, Spacing3{1, 1, 1});
                for (i64 z = 0; z < big.z; ++z) {
                    for (i64 y = 0; y < big.y; ++y) {
                        for (i64 x = 0; x < big.x; ++x) {
                            const i64 cz = z - off_z, cy = y - off_y, cx = x - off_x;
                            const bool inside = cz >= 0 && cz < shape.z && cy >= 0 &&
                                                cy < shape.y && cx >= 0 && cx < shape.x;
                            big_ind.at(z, y, x) =
                                inside ? indicator.at(cz, cy, cx)
                                       : static_cast<std::uint8_t>(adversary_fg);
                        }
                    }
                }
                auto big_to_fg = brute_edt(big_ind);
                Volume<std::uint8_t> big_comp = big_ind;
                for (auto& v : big_comp.data) v = v ? 0 : 1;
                auto big_to_bg = brute_edt(big_comp);

                for (i64 z = 0; z < shape.z; ++z) {
                    for (i64 y = 0; y < shape.y; ++y) {
                        for (i64 x = 0; x < shape.x; ++x) {
                            const i64 i = lv.volume.index(z, y, x);
                            if (d.mask[mito][i] == 0) continue;
                            ++masked_in_total;
                            const bool fg = indicator[i] != 0;
                            const double crop_d2 = fg ? crop_to_bg[i] : crop_to_fg[i];
                            const double big_d2 = fg
                                ? big_to_bg.at(z + off_z, y + off_y, x + off_x)
                                : big_to_fg.at(z + off_z, y + off_y, x + off_x);
                            REQUIRE(crop_d2 == big_d2);
                        }
                    }
                }
            }
        }
    }
    CHECK(masked_in_total > 0);  // the soundness claim was actually exercised
}

TEST_CASE("uniformly labeled dense crop saturates to +/-1; masks follow the world flag") {
    // One class fills the crop: its indicator has an empty opposite phase,
    // so distances hit the inf sentinel and tanh saturates exactly.
    LabelVolume lv;
    lv.volume = Volume<std::uint32_t>(Shape3{3, 3, 3}, Spacing3{1, 1, 1}, 1);
    lv.schema.classes = {{0, "background"}, {1, "mito"}};
    lv.meta.annotated_classes = {0, 1};
    lv.meta.closed_world = true;

    DistanceTargets d = distance_targets(lv, DistanceParams{2.0, true});
    const auto background = channel_of(d.class_ids, 0);
    const auto mito = channel_of(d.class_ids, 1);
    for (i64 i = 0; i < lv.volume.voxels(); ++i) {
        CHECK(d.dist[mito][i] == 1.0f);
        CHECK(d.dist[background][i] == -1.0f);
        CHECK(d.mask[mito][i] == 1);  // closed world keeps saturated signal
        CHECK(d.mask[background][i] == 1);
    }

    // Open world + border masking: the sentinel magnitude exceeds any
    // border distance, so the saturated channel is masked away.
    lv.meta.closed_world = false;
    DistanceTargets open = distance_targets(lv, DistanceParams{2.0, true});
    CHECK(mask_sum(open.mask[mito]) == 0);
    CHECK(mask_sum(open.mask[background]) == 0);
    // Without border masking the saturated signal stays in.
    DistanceTargets unmasked = distance_targets(lv, DistanceParams{2.0, false});
    CHECK(mask_sum(unmasked.mask[mito]) == lv.volume.voxels());
}

TEST_CASE("build_targets: dense two-class crop has all-ones masks everywhere") {
    ClassSchema schema;
    schema.classes = {{0, "background"}, {1, "mito"}};
    auto lv = gen_spheres(Shape3{6, 6, 6}, Spacing3{1, 1, 1}, {{2.0, 2.0, 2.0, 1.6, 1}}, schema);
    TargetBundle bundle = build_targets(lv, DistanceParams{2.0, false});
    REQUIRE(bundle.class_ids == std::vector<std::uint32_t>{0, 1});
    for (std::size_t k = 0; k < bundle.num_classes(); ++k) {
        CHECK(mask_sum(bundle.hot_mask[k]) == lv.volume.voxels());
        CHECK(mask_sum(bundle.dist_mask[k]) == lv.volume.voxels());
    }
}

TEST_CASE("build_targets: sparse crop has hot true negatives but no distance signal") {
    ClassSchema schema = mito_nucleus_schema();
    auto lv = gen_spheres(Shape3{8, 8, 8}, Spacing3{1, 1, 1},
                          {{3.0, 3.0, 3.0, 2.2, 1}, {6.0, 6.0, 6.0, 1.4, 2}}, schema);
    auto sparse = sparsify(lv, SparsifySpec{{1}, {2}, 0});

    TargetBundle bundle = build_targets(sparse, DistanceParams{2.0, false});
    const auto nucleus = channel_of(bundle.class_ids, 2);
    CHECK(mask_sum(bundle.hot_mask[nucleus]) > 0);
    CHECK(mask_sum(bundle.dist_mask[nucleus]) == 0);
}

TEST_CASE("build_targets: dist_mask implies hot_mask on random crops") {
    SplitMix64 rng(0xd15c);
    for (int trial = 0; trial < 15; ++trial) {
        LabelVolume lv = random_dense_crop(rng, 6, Spacing3{1, 1, 1});
        if (rng.next_bool(0.5)) {
            lv = sparsify(lv, SparsifySpec{{}, {2}, 0});
        }
        lv.meta.closed_world = rng.next_bool(0.5);
        TargetBundle bundle =
            build_targets(lv, DistanceParams{rng.next_in(0.5, 4.0), rng.next_bool(0.5)});
        for (std::size_t k = 0; k < bundle.num_classes(); ++k) {
            for (i64 i = 0; i < lv.volume.voxels(); ++i) {
                if (bundle.dist_mask[k][i]) REQUIRE(bundle.hot_mask[k][i] == 1);
            }
        }
    }
}

TEST_CASE("spacing covariance: joint rescale leaves channels bit-identical") {
    SplitMix64 rng(0xc07a);
    constexpr double choices[4] = {0.5, 1.0, 2.0, 4.0};
    constexpr double scales[4] = {1.0, 2.0, 4.0, 8.0};
    for (int trial = 0; trial < 20; ++trial) {
        Spacing3 spacing{choices[rng.next_below(4)], choices[rng.next_below(4)],
                         choices[rng.next_below(4)]};
        LabelVolume lv = random_dense_crop(rng, 6, spacing);
        const bool border = rng.next_bool(0.5);
        if (border) lv.meta.closed_world = false;
        const double scale = scales[rng.next_below(4)];

        LabelVolume scaled = lv;
        scaled.volume.spacing = Spacing3{spacing.z * 3.0, spacing.y * 3.0, spacing.x * 3.0};

        TargetBundle a = build_targets(lv, DistanceParams{scale, border});
        TargetBundle b = build_targets(scaled, DistanceParams{scale * 3.0, border});

        for (std::size_t k = 0; k < a.num_classes(); ++k) {
            REQUIRE(std::memcmp(a.dist[k].data.data(), b.dist[k].data.data(),
                                a.dist[k].data.size() * sizeof(float)) == 0);
            REQUIRE(a.dist_mask[k].data == b.dist_mask[k].data);
            REQUIRE(a.hot[k].data == b.hot[k].data);
        }
    }
}

TEST_CASE("build_targets under different worker counts is bit-identical") {
    SplitMix64 rng(0x7788);
    LabelVolume lv = random_dense_crop(rng, 8, Spacing3{1, 1, 1});

    setenv("HOTDIST_THREADS", "1", 1);
    TargetBundle one = build_targets(lv, DistanceParams{2.0, false});
    setenv("HOTDIST_THREADS", "2", 1);
    TargetBundle two = build_targets(lv, DistanceParams{2.0, false});
    unsetenv("HOTDIST_THREADS");
    TargetBundle all = build_targets(lv, DistanceParams{2.0, false});

    for (std::size_t k = 0; k < one.num_classes(); ++k) {
        CHECK(one.dist[k].data == two.dist[k].data);
        CHECK(one.dist[k].data == all.dist[k].data);
        CHECK(one.hot_mask[k].data == two.hot_mask[k].data);
        CHECK(one.dist_mask[k].data == all.dist_mask[k].data);
    }
}

TEST_CASE("target bundle manifest round-trips") {
    SplitMix64 rng(0x9021);
    LabelVolume lv = random_dense_crop(rng, 5, Spacing3{1, 2, 1});
    TargetBundle bundle = build_targets(lv, DistanceParams{2.0, false});

    fs::path dir = fs::temp_directory_path() / ("hotdist_bundle_" + std::to_string(rng.next()));
    fs::create_directories(dir);
    write_target_bundle(bundle, dir / "targets.json");
    TargetBundle back = read_target_bundle(dir / "targets.json");

    REQUIRE(back.class_ids == bundle.class_ids);
    CHECK(back.scale == bundle.scale);
    for (std::size_t k = 0; k < bundle.num_classes(); ++k) {
        CHECK(back.hot[k].data == bundle.hot[k].data);
        CHECK(back.hot_mask[k].data == bundle.hot_mask[k].data);
        CHECK(back.dist[k].data == bundle.dist[k].data);
        CHECK(back.dist_mask[k].data == bundle.dist_mask[k].data);
        CHECK(back.dist[k].spacing == bundle.dist[k].spacing);
    }
    fs::remove_all(dir);
}

TEST_CASE("bundle reader rejects masked values that break the channel invariants") {
    SplitMix64 rng(0xbadb);
    LabelVolume lv = random_dense_crop(rng, 4, Spacing3{1, 1, 1});
    TargetBundle bundle = build_targets(lv, DistanceParams{2.0, false});

    fs::path dir = fs::temp_directory_path() / ("hotdist_badbundle_" + std::to_string(rng.next()));
    fs::create_directories(dir);

    TargetBundle bad_hot = bundle;
    bad_hot.hot[0][3] = 0.25f;  // masked (dense crop), neither 0 nor 1
    write_target_bundle(bad_hot, dir / "bad_hot.json");
    CHECK_THROWS_AS(static_cast<void>(read_target_bundle(dir / "bad_hot.json")), Error);

    TargetBundle bad_dist = bundle;
    bad_dist.dist[0][3] = 1.5f;
    write_target_bundle(bad_dist, dir / "bad_dist.json");
    CHECK_THROWS_AS(static_cast<void>(read_target_bundle(dir / "bad_dist.json")), Error);

    // The same junk under a zero mask is legal.
    TargetBundle masked_out = bundle;
    masked_out.hot_mask[0][3] = 0;
    masked_out.hot[0][3] = 0.25f;
    write_target_bundle(masked_out, dir / "masked.json");
    CHECK_NOTHROW(static_cast<void>(read_target_bundle(dir / "masked.json")));
    fs::remove_all(dir);
}

TEST_CASE("distance params are validated") {
    LabelVolume lv = sparse_mito_crop();
    CHECK_THROWS_AS(build_targets(lv, DistanceParams{0.0, false}), Error);
    CHECK_THROWS_AS(build_targets(lv, DistanceParams{-2.0, false}), Error);
    CHECK(DistanceParams::default_scale(Spacing3{2.0, 1.0, 4.0}) == 10.0);
}

TEST_CASE("invalid labels are rejected by target generation") {
    LabelVolume lv = sparse_mito_crop();
    lv.volume[0] = 99;
    CHECK_THROWS_AS(hot_targets(lv), Error);
    CHECK_THROWS_AS(distance_targets(lv, DistanceParams{1.0, false}), Error);
}
