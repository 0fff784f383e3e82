#include "hotdist/oracle.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <vector>

namespace hotdist {

namespace {

struct UnionFind {
    std::vector<i64> parent;

    explicit UnionFind(i64 n) : parent(static_cast<std::size_t>(n)) {
        std::iota(parent.begin(), parent.end(), 0);
    }

    i64 find(i64 a) {
        while (parent[a] != a) {
            parent[a] = parent[parent[a]];
            a = parent[a];
        }
        return a;
    }

    void unite(i64 a, i64 b) {
        a = find(a);
        b = find(b);
        // Smaller root wins so component representatives are min indices.
        if (a == b) return;
        if (a < b) {
            parent[b] = a;
        } else {
            parent[a] = b;
        }
    }
};

struct Event {
    float value;
    i64 voxel;
    std::uint32_t seed;
    bool live;
};

bool event_beats(const Event& a, const Event& b) {
    if (a.value != b.value) return a.value > b.value;
    if (a.voxel != b.voxel) return a.voxel < b.voxel;
    return a.seed < b.seed;
}

}  // namespace

Volume<double> brute_edt(const Volume<std::uint8_t>& binary) {
    if (binary.voxels() > 1000) throw Error("brute_edt size guard: at most 1000 voxels");

    const Shape3 s = binary.shape;
    const Spacing3 sp = binary.spacing;
    Volume<double> out(s, sp, std::numeric_limits<double>::infinity());

    for (i64 z = 0; z < s.z; ++z) {
        for (i64 y = 0; y < s.y; ++y) {
            for (i64 x = 0; x < s.x; ++x) {
                double best = std::numeric_limits<double>::infinity();
                for (i64 sz = 0; sz < s.z; ++sz) {
                    for (i64 sy = 0; sy < s.y; ++sy) {
                        for (i64 sx = 0; sx < s.x; ++sx) {
                            if (binary.at(sz, sy, sx) == 0) continue;
                            const double dz = static_cast<double>(z - sz) * sp.z;
                            const double dy = static_cast<double>(y - sy) * sp.y;
                            const double dx = static_cast<double>(x - sx) * sp.x;
                            const double d2 = dz * dz + dy * dy + dx * dx;
                            if (d2 < best) best = d2;
                        }
                    }
                }
                out.at(z, y, x) = best;
            }
        }
    }
    return out;
}

InstanceMap brute_watershed(const Volume<float>& dist, const WatershedParams& params) {
    params.validate();
    if (dist.voxels() > 512) throw Error("brute_watershed size guard: at most 512 voxels");

    const Shape3 s = dist.shape;
    const bool all26 = params.connectivity == 26;

    auto adjacent = [&](i64 a, i64 b) {
        const i64 az = a / (s.y * s.x), ay = (a / s.x) % s.y, ax = a % s.x;
        const i64 bz = b / (s.y * s.x), by = (b / s.x) % s.y, bx = b % s.x;
        const i64 dz = az > bz ? az - bz : bz - az;
        const i64 dy = ay > by ? ay - by : by - ay;
        const i64 dx = ax > bx ? ax - bx : bx - ax;
        if (a == b) return false;
        if (all26) return dz <= 1 && dy <= 1 && dx <= 1;
        return dz + dy + dx == 1;
    };

    // Seed components via union-find over every adjacent above-seed pair.
    UnionFind uf(dist.voxels());
    std::vector<bool> is_seed(static_cast<std::size_t>(dist.voxels()));
    for (i64 i = 0; i < dist.voxels(); ++i) {
        is_seed[static_cast<std::size_t>(i)] = static_cast<double>(dist[i]) > params.t_seed;
    }
    for (i64 a = 0; a < dist.voxels(); ++a) {
        if (!is_seed[static_cast<std::size_t>(a)]) continue;
        for (i64 b = a + 1; b < dist.voxels(); ++b) {
            if (is_seed[static_cast<std::size_t>(b)] && adjacent(a, b)) uf.unite(a, b);
        }
    }
    // Number seed components by their minimum linear index, ascending.
    std::vector<std::uint32_t> seed_label(static_cast<std::size_t>(dist.voxels()), 0);
    std::uint32_t num_seeds = 0;
    std::vector<std::uint32_t> root_label(static_cast<std::size_t>(dist.voxels()), 0);
    for (i64 i = 0; i < dist.voxels(); ++i) {
        if (!is_seed[static_cast<std::size_t>(i)]) continue;
        const i64 root = uf.find(i);
        if (root_label[static_cast<std::size_t>(root)] == 0) {
            root_label[static_cast<std::size_t>(root)] = ++num_seeds;
        }
        seed_label[static_cast<std::size_t>(i)] = root_label[static_cast<std::size_t>(root)];
    }

    Volume<std::uint32_t> labels = dist.like<std::uint32_t>();
    std::vector<Event> events;
    for (i64 i = 0; i < dist.voxels(); ++i) {
        if (seed_label[static_cast<std::size_t>(i)] != 0) {
            events.push_back({dist[i], i, seed_label[static_cast<std::size_t>(i)], true});
        }
    }

    // Flood: rescan the whole list for the best live event each round.
    while (true) {
        int best = -1;
        for (int e = 0; e < static_cast<int>(events.size()); ++e) {
            if (!events[static_cast<std::size_t>(e)].live) continue;
            if (best < 0 || event_beats(events[static_cast<std::size_t>(e)],
                                        events[static_cast<std::size_t>(best)])) {
                best = e;
            }
        }
        if (best < 0) break;
        Event ev = events[static_cast<std::size_t>(best)];
        events[static_cast<std::size_t>(best)].live = false;
        if (labels[ev.voxel] != 0) continue;
        labels[ev.voxel] = ev.seed;
        for (i64 n = 0; n < dist.voxels(); ++n) {
            if (labels[n] == 0 && adjacent(ev.voxel, n) &&
                static_cast<double>(dist[n]) > params.t_mask) {
                events.push_back({dist[n], n, ev.seed, true});
            }
        }
    }

    // Contiguous renumbering by smallest linear index, done with an
    // old->new table built in a separate scan.
    std::vector<std::uint32_t> order;
    for (i64 i = 0; i < labels.voxels(); ++i) {
        const std::uint32_t old = labels[i];
        if (old == 0) continue;
        if (std::find(order.begin(), order.end(), old) == order.end()) order.push_back(old);
    }
    std::vector<std::uint32_t> remap(num_seeds + 1, 0);
    for (std::uint32_t k = 0; k < order.size(); ++k) {
        remap[order[static_cast<std::size_t>(k)]] = k + 1;
    }
    for (i64 i = 0; i < labels.voxels(); ++i) {
        if (labels[i] != 0) labels[i] = remap[labels[i]];
    }
    return {std::move(labels), static_cast<std::uint32_t>(order.size())};
}

}  // namespace hotdist
