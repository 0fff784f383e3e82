/* Synthetic labeled fixtures: sphere phantoms under a class schema, plus
 * the sparse-annotation simulator that hides classes behind the unknown
 * label. Everything here is deterministic given its seeds.
 *
 * Geometry convention: the center of voxel (z,y,x) sits at
 * (z*sz, y*sy, x*sx) in physical units; sphere membership is voxel-center
 * containment, |center - voxel_center| <= radius.
 */

#ifndef HOTDIST_SYNTH_HPP
#define HOTDIST_SYNTH_HPP

#include <cstdint>
#include <vector>

#include "hotdist/schema.hpp"
#include "hotdist/volume.hpp"

namespace hotdist {

struct SphereSpec {
    double cz = 0.0, cy = 0.0, cx = 0.0;  // physical coordinates
    double radius = 0.0;                  // physical units, > 0
    std::uint32_t class_id = 0;
};

struct SparsifySpec {
    std::vector<std::uint32_t> keep_classes;
    std::vector<std::uint32_t> hidden_classes;
    /// Recorded in fixture manifests for reproducibility; the relabeling
    /// itself is deterministic and does not consume it.
    std::uint64_t seed = 0;
};

/// Voxels take the class of the first containing sphere, else the schema's
/// "background" class when one is declared, else the unknown label.
/// annotated_classes = sphere classes (+ background); closed_world = true.
/// Throws when spheres of distinct classes sharing an exclusivity group
/// claim the same voxel.
LabelVolume gen_spheres(Shape3 shape, Spacing3 spacing, const std::vector<SphereSpec>& specs,
                        const ClassSchema& schema);

/// Hidden-class voxels become the unknown label and those classes leave
/// annotated_classes; everything else is untouched.
LabelVolume sparsify(const LabelVolume& lv, const SparsifySpec& spec);

}  // namespace hotdist

#endif
