/* Training-target generation: per-class one-hot channels with
 * exclusivity-derived validity masks, and bounded signed boundary-distance
 * channels with dense-annotation masks.
 *
 * Masking rules, per class c and voxel v:
 *   hot channel   label(v)=c                         -> hot 1, mask 1
 *                 c densely annotated                -> hot 0, mask 1
 *                 label(v) mutually exclusive with c -> hot 0, mask 1
 *                 otherwise                          -> mask 0
 *   dist channel  only densely annotated classes carry signal; sparse
 *                 classes get all-zero masks (channel layout stays
 *                 class-uniform). With border_masking on and an open-world
 *                 crop, voxels whose in-crop |distance| exceeds the distance
 *                 to the nearest crop face are masked out: an object just
 *                 past the crop could be nearer than anything inside.
 */

#ifndef HOTDIST_TARGETS_HPP
#define HOTDIST_TARGETS_HPP

#include <cstdint>
#include <vector>

#include "hotdist/edt.hpp"
#include "hotdist/schema.hpp"
#include "hotdist/volume.hpp"

namespace hotdist {

struct DistanceParams {
    /// tanh argument divisor, in physical units; must be > 0.
    double scale = 0.0;
    /// Mask distance targets invalidated by crop truncation (no-op when the
    /// crop is closed-world).
    bool border_masking = false;

    static double default_scale(const Spacing3& spacing) { return 10.0 * spacing.min(); }
};

/// The combined training target. Channels are ordered by ascending class id
/// and share shape/spacing with the source labels. Wherever dist_mask is 1,
/// hot_mask is 1 too.
struct TargetBundle {
    std::vector<std::uint32_t> class_ids;
    std::vector<Volume<float>> hot;               // {0,1}
    std::vector<Volume<std::uint8_t>> hot_mask;   // {0,1}
    std::vector<Volume<float>> dist;              // [-1,1], tanh-scaled
    std::vector<Volume<std::uint8_t>> dist_mask;  // {0,1}
    double scale = 0.0;

    std::size_t num_classes() const { return class_ids.size(); }
};

struct HotTargets {
    std::vector<std::uint32_t> class_ids;
    std::vector<Volume<float>> hot;
    std::vector<Volume<std::uint8_t>> mask;
};

struct DistanceTargets {
    std::vector<std::uint32_t> class_ids;
    std::vector<Volume<float>> dist;
    std::vector<Volume<std::uint8_t>> mask;
};

HotTargets hot_targets(const LabelVolume& lv);

DistanceTargets distance_targets(const LabelVolume& lv, const DistanceParams& params);

/// tanh(d / scale) per voxel; +/-inf saturate to exactly +/-1.
Volume<float> tanh_scale(const Volume<double>& signed_dist, const DistanceParams& params);

TargetBundle build_targets(const LabelVolume& lv, const DistanceParams& params);

}  // namespace hotdist

#endif
