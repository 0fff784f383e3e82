/* Prediction post-processing: semantic masks by thresholding, instance maps
 * by seeded watershed on the (tanh-scaled) distance channel, and overlap
 * scoring.
 *
 * The watershed is a deterministic priority flood. Seeds are the connected
 * components of {dist > t_seed}; the flood claims voxels of
 * {dist > t_mask} in descending distance order, ties broken by ascending
 * linear voxel index, then ascending claiming-seed id. Above-threshold
 * voxels not reachable from any seed stay 0. Final labels are renumbered
 * 1..K by each instance's smallest linear voxel index.
 */

#ifndef HOTDIST_POSTPROCESS_HPP
#define HOTDIST_POSTPROCESS_HPP

#include <cstdint>

#include "hotdist/volume.hpp"

namespace hotdist {

struct WatershedParams {
    double t_seed = 0.5;
    double t_mask = 0.0;
    int connectivity = 26;  // 6 or 26

    void validate() const;
};

struct InstanceMap {
    Volume<std::uint32_t> labels;  // 0 = background, instances 1..count
    std::uint32_t count = 0;
};

/// voxel -> 1 iff dist > t (strict).
Volume<std::uint8_t> threshold_semantic(const Volume<float>& dist, double t);

/// Maximal connected 1-regions labeled 1..K in order of smallest linear
/// voxel index.
InstanceMap connected_components(const Volume<std::uint8_t>& binary, int connectivity);

InstanceMap watershed_instances(const Volume<float>& dist, const WatershedParams& params);

/// 2|a&b| / (|a|+|b|); 1.0 when both volumes are empty.
double dice_score(const Volume<std::uint8_t>& a, const Volume<std::uint8_t>& b);

}  // namespace hotdist

#endif
