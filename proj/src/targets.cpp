#include "hotdist/targets.hpp"

#include <cmath>
#include <limits>
#include <unordered_set>

#include "hotdist/parallel.hpp"

namespace hotdist {

namespace {

void check_params(const DistanceParams& params) {
    if (!(params.scale > 0.0)) throw Error("DistanceParams.scale must be > 0");
}

void hot_targets_for_class(const LabelVolume& lv, std::uint32_t c, Volume<float>& hot,
                           Volume<std::uint8_t>& mask) {
    const bool annotated = lv.meta.annotated_classes.count(c) > 0;
    const auto partner_set = lv.schema.exclusive_partners(c);
    const std::unordered_set<std::uint32_t> partners(partner_set.begin(), partner_set.end());

    const auto& labels = lv.volume;
    for (i64 i = 0; i < labels.voxels(); ++i) {
        const std::uint32_t value = labels[i];
        if (value == c) {
            hot[i] = 1.0f;
            mask[i] = 1;
        } else if (annotated || partners.count(value)) {
            hot[i] = 0.0f;
            mask[i] = 1;
        }
    }
}

/// min over axes of the spacing-weighted index distance to the nearest crop
/// face (faces lie in the planes of the border voxel centers).
double border_distance(const Shape3& s, i64 z, i64 y, i64 x, double wz, double wy, double wx) {
    const double dz = static_cast<double>(std::min(z, s.z - 1 - z)) * wz;
    const double dy = static_cast<double>(std::min(y, s.y - 1 - y)) * wy;
    const double dx = static_cast<double>(std::min(x, s.x - 1 - x)) * wx;
    return std::min(dz, std::min(dy, dx));
}

/* Distance channel for one densely annotated class.
 *
 * The EDT runs with weights spacing/scale and the channel is tanh of the
 * normalized signed distance. This equals tanh(physical distance / scale)
 * as a real number, with one property the physical-units composition lacks:
 * jointly rescaling spacing and scale leaves every weight quotient, and
 * so every output bit, unchanged. Border masking compares in the same
 * normalized units.
 */
void dist_targets_for_class(const LabelVolume& lv, std::uint32_t c, const DistanceParams& params,
                            Volume<float>& dist, Volume<std::uint8_t>& mask) {
    const auto& labels = lv.volume;
    Volume<std::uint8_t> indicator = labels.like<std::uint8_t>();
    for (i64 i = 0; i < labels.voxels(); ++i) indicator[i] = (labels[i] == c) ? 1 : 0;

    const double wz = labels.spacing.z / params.scale;
    const double wy = labels.spacing.y / params.scale;
    const double wx = labels.spacing.x / params.scale;
    Volume<double> dn = detail::signed_distance_weighted(indicator, wz, wy, wx);

    const bool apply_border = params.border_masking && !lv.meta.closed_world;
    const Shape3 s = labels.shape;
    i64 i = 0;
    for (i64 z = 0; z < s.z; ++z) {
        for (i64 y = 0; y < s.y; ++y) {
            for (i64 x = 0; x < s.x; ++x, ++i) {
                dist[i] = static_cast<float>(std::tanh(dn[i]));
                if (apply_border && std::abs(dn[i]) > border_distance(s, z, y, x, wz, wy, wx)) {
                    mask[i] = 0;
                } else {
                    mask[i] = 1;
                }
            }
        }
    }
}

}  // namespace

HotTargets hot_targets(const LabelVolume& lv) {
    require_valid_labels(lv);

    HotTargets out;
    out.class_ids = lv.schema.sorted_ids();
    const auto n = static_cast<i64>(out.class_ids.size());
    for (i64 k = 0; k < n; ++k) {
        out.hot.push_back(lv.volume.like<float>());
        out.mask.push_back(lv.volume.like<std::uint8_t>());
    }
    parallel_for_index(n, [&](i64 k) {
        hot_targets_for_class(lv, out.class_ids[static_cast<std::size_t>(k)],
                              out.hot[static_cast<std::size_t>(k)],
                              out.mask[static_cast<std::size_t>(k)]);
    });
    return out;
}

DistanceTargets distance_targets(const LabelVolume& lv, const DistanceParams& params) {
    check_params(params);
    require_valid_labels(lv);

    DistanceTargets out;
    out.class_ids = lv.schema.sorted_ids();
    const auto n = static_cast<i64>(out.class_ids.size());
    for (i64 k = 0; k < n; ++k) {
        out.dist.push_back(lv.volume.like<float>());
        out.mask.push_back(lv.volume.like<std::uint8_t>());
    }
    parallel_for_index(n, [&](i64 k) {
        const std::uint32_t c = out.class_ids[static_cast<std::size_t>(k)];
        // Sparse classes carry no distance signal: zero mask, zero channel.
        if (!lv.meta.annotated_classes.count(c)) return;
        dist_targets_for_class(lv, c, params, out.dist[static_cast<std::size_t>(k)],
                               out.mask[static_cast<std::size_t>(k)]);
    });
    return out;
}

Volume<float> tanh_scale(const Volume<double>& signed_dist, const DistanceParams& params) {
    check_params(params);
    Volume<float> out = signed_dist.like<float>();
    for (i64 i = 0; i < signed_dist.voxels(); ++i) {
        out[i] = static_cast<float>(std::tanh(signed_dist[i] / params.scale));
    }
    return out;
}

TargetBundle build_targets(const LabelVolume& lv, const DistanceParams& params) {
    check_params(params);

    HotTargets h = hot_targets(lv);
    DistanceTargets d = distance_targets(lv, params);

    TargetBundle bundle;
    bundle.class_ids = std::move(h.class_ids);
    bundle.hot = std::move(h.hot);
    bundle.hot_mask = std::move(h.mask);
    bundle.dist = std::move(d.dist);
    bundle.dist_mask = std::move(d.mask);
    bundle.scale = params.scale;
    return bundle;
}

}  // namespace hotdist
