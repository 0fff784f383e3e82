/* Exact squared Euclidean distance transform and signed boundary distances.
 *
 * Distances are center-to-center: the magnitude at a voxel is the minimum
 * spacing-weighted distance from its center to the center of any voxel in
 * the site set (squared_edt) or in the opposite binary phase
 * (signed_distance). Signs: > 0 inside the foreground, < 0 in the
 * background; no voxel is ever exactly 0. When one phase is empty the other
 * phase carries the +/-inf sentinel.
 */

#ifndef HOTDIST_EDT_HPP
#define HOTDIST_EDT_HPP

#include <cstdint>

#include "hotdist/volume.hpp"

namespace hotdist {

struct SquaredEdt {
    Volume<double> dist2;
    /// False when the input had no 1-voxels; dist2 is then all +inf.
    bool has_sites = false;
};

/// Exact minimum over all 1-voxels of the spacing-weighted squared
/// center-to-center distance. 1-voxels hold 0.
SquaredEdt squared_edt(const Volume<std::uint8_t>& binary);

/// Signed distance per the conventions above; either phase may be empty.
Volume<double> signed_distance(const Volume<std::uint8_t>& binary);

namespace detail {

/// squared_edt with explicit per-axis weights (physical units per voxel
/// step along z, y, x). The weights need not match binary.spacing; callers
/// use this to evaluate distances in a rescaled coordinate system.
SquaredEdt squared_edt_weighted(const Volume<std::uint8_t>& binary, double wz, double wy,
                                double wx);

/// Signed distance under explicit per-axis weights.
Volume<double> signed_distance_weighted(const Volume<std::uint8_t>& binary, double wz, double wy,
                                        double wx);

}  // namespace detail

}  // namespace hotdist

#endif
