#include "hotdist/postprocess.hpp"

#include <array>
#include <queue>
#include <vector>

namespace hotdist {

namespace {

struct Offset {
    i64 dz, dy, dx;
};

std::vector<Offset> neighbor_offsets(int connectivity) {
    std::vector<Offset> out;
    if (connectivity == 6) {
        out = {{-1, 0, 0}, {1, 0, 0}, {0, -1, 0}, {0, 1, 0}, {0, 0, -1}, {0, 0, 1}};
        return out;
    }
    for (i64 dz = -1; dz <= 1; ++dz) {
        for (i64 dy = -1; dy <= 1; ++dy) {
            for (i64 dx = -1; dx <= 1; ++dx) {
                if (dz == 0 && dy == 0 && dx == 0) continue;
                out.push_back({dz, dy, dx});
            }
        }
    }
    return out;
}

struct FloodEvent {
    float value;
    i64 voxel;
    std::uint32_t seed;
};

/// a < b means b pops first: higher value, then lower voxel index, then
/// lower seed id.
struct FloodOrder {
    bool operator()(const FloodEvent& a, const FloodEvent& b) const {
        if (a.value != b.value) return a.value < b.value;
        if (a.voxel != b.voxel) return a.voxel > b.voxel;
        return a.seed > b.seed;
    }
};

/// Renumber nonzero labels to 1..K by first appearance in linear order.
InstanceMap relabel_contiguous(Volume<std::uint32_t> labels) {
    std::vector<std::uint32_t> remap;  // old label -> new label, 0 = unseen
    std::uint32_t next = 0;
    for (i64 i = 0; i < labels.voxels(); ++i) {
        const std::uint32_t old = labels[i];
        if (old == 0) continue;
        if (old >= remap.size()) remap.resize(static_cast<std::size_t>(old) + 1, 0);
        if (remap[old] == 0) remap[old] = ++next;
        labels[i] = remap[old];
    }
    return {std::move(labels), next};
}

}  // namespace

void WatershedParams::validate() const {
    if (connectivity != 6 && connectivity != 26) {
        throw Error("connectivity must be 6 or 26");
    }
    if (!(t_seed > -1.0 && t_seed < 1.0) || !(t_mask > -1.0 && t_mask < 1.0)) {
        throw Error("thresholds must lie in (-1, 1)");
    }
    if (!(t_seed > t_mask)) throw Error("t_seed must be greater than t_mask");
}

Volume<std::uint8_t> threshold_semantic(const Volume<float>& dist, double t) {
    if (!(t > -1.0 && t < 1.0)) throw Error("threshold must lie in (-1, 1)");
    Volume<std::uint8_t> out = dist.like<std::uint8_t>();
    for (i64 i = 0; i < dist.voxels(); ++i) {
        out[i] = static_cast<double>(dist[i]) > t ? 1 : 0;
    }
    return out;
}

InstanceMap connected_components(const Volume<std::uint8_t>& binary, int connectivity) {
    if (connectivity != 6 && connectivity != 26) {
        throw Error("connectivity must be 6 or 26");
    }
    const auto offsets = neighbor_offsets(connectivity);
    const Shape3 s = binary.shape;

    Volume<std::uint32_t> labels = binary.like<std::uint32_t>();
    std::uint32_t next = 0;
    std::vector<i64> queue;

    // Scanning in linear order means the first voxel of each new component
    // is its smallest linear index, so labels come out already ordered.
    for (i64 start = 0; start < binary.voxels(); ++start) {
        if (binary[start] == 0 || labels[start] != 0) continue;
        ++next;
        labels[start] = next;
        queue.assign(1, start);
        while (!queue.empty()) {
            const i64 cur = queue.back();
            queue.pop_back();
            const i64 cz = cur / (s.y * s.x);
            const i64 cy = (cur / s.x) % s.y;
            const i64 cx = cur % s.x;
            for (const auto& o : offsets) {
                const i64 nz = cz + o.dz, ny = cy + o.dy, nx = cx + o.dx;
                if (nz < 0 || nz >= s.z || ny < 0 || ny >= s.y || nx < 0 || nx >= s.x) continue;
                const i64 n = (nz * s.y + ny) * s.x + nx;
                if (binary[n] == 0 || labels[n] != 0) continue;
                labels[n] = next;
                queue.push_back(n);
            }
        }
    }
    return {std::move(labels), next};
}

InstanceMap watershed_instances(const Volume<float>& dist, const WatershedParams& params) {
    params.validate();
    const Shape3 s = dist.shape;
    const auto offsets = neighbor_offsets(params.connectivity);

    InstanceMap seeds = connected_components(threshold_semantic(dist, params.t_seed),
                                             params.connectivity);

    Volume<std::uint32_t> labels = dist.like<std::uint32_t>();
    std::priority_queue<FloodEvent, std::vector<FloodEvent>, FloodOrder> queue;
    for (i64 i = 0; i < dist.voxels(); ++i) {
        if (seeds.labels[i] != 0) queue.push({dist[i], i, seeds.labels[i]});
    }

    while (!queue.empty()) {
        const FloodEvent ev = queue.top();
        queue.pop();
        if (labels[ev.voxel] != 0) continue;
        labels[ev.voxel] = ev.seed;

        const i64 cz = ev.voxel / (s.y * s.x);
        const i64 cy = (ev.voxel / s.x) % s.y;
        const i64 cx = ev.voxel % s.x;
        for (const auto& o : offsets) {
            const i64 nz = cz + o.dz, ny = cy + o.dy, nx = cx + o.dx;
            if (nz < 0 || nz >= s.z || ny < 0 || ny >= s.y || nx < 0 || nx >= s.x) continue;
            const i64 n = (nz * s.y + ny) * s.x + nx;
            if (labels[n] != 0) continue;
            if (static_cast<double>(dist[n]) > params.t_mask) {
                queue.push({dist[n], n, ev.seed});
            }
        }
    }
    return relabel_contiguous(std::move(labels));
}

double dice_score(const Volume<std::uint8_t>& a, const Volume<std::uint8_t>& b) {
    if (a.shape != b.shape) throw Error("dice_score: shape mismatch");
    i64 na = 0, nb = 0, overlap = 0;
    for (i64 i = 0; i < a.voxels(); ++i) {
        const bool in_a = a[i] != 0;
        const bool in_b = b[i] != 0;
        na += in_a;
        nb += in_b;
        overlap += in_a && in_b;
    }
    if (na + nb == 0) return 1.0;
    return 2.0 * static_cast<double>(overlap) / static_cast<double>(na + nb);
}

}  // namespace hotdist
