/* Brute-force reference computations for tests and acceptance checks.
 *
 * These deliberately share no code with the implementations they check:
 * the distance oracle is an all-pairs scan instead of separable passes, and
 * the watershed oracle keeps a flat event list it rescans instead of a heap,
 * with seed components from union-find instead of flood fill. Both are
 * size-guarded because of their quadratic cost.
 */

#ifndef HOTDIST_ORACLE_HPP
#define HOTDIST_ORACLE_HPP

#include <cstdint>

#include "hotdist/postprocess.hpp"
#include "hotdist/volume.hpp"

namespace hotdist {

/// All-pairs exact squared distance to the nearest 1-voxel; all +inf when
/// there is none. Guard: at most 1000 voxels.
Volume<double> brute_edt(const Volume<std::uint8_t>& binary);

/// Event-by-event priority flood with the watershed tie rules. Guard: at
/// most 512 voxels.
InstanceMap brute_watershed(const Volume<float>& dist, const WatershedParams& params);

}  // namespace hotdist

#endif
