/* Class catalog, per-crop annotation metadata, and labeled volumes.
 *
 * Label semantics: a voxel carries either a declared class id or
 * kUnknownLabel. Whether a class's absence is a usable true negative is
 * decided by CropMeta.annotated_classes (dense annotation) and the schema's
 * exclusivity groups (a positive label of a mutually exclusive class), never
 * inferred from pixels alone.
 */

#ifndef HOTDIST_SCHEMA_HPP
#define HOTDIST_SCHEMA_HPP

#include <cstdint>
#include <set>
#include <string>
#include <vector>

#include "hotdist/volume.hpp"

namespace hotdist {

/// Reserved sentinel: "no label information at this voxel". Never a class id.
inline constexpr std::uint32_t kUnknownLabel = 0xFFFFFFFFu;

struct ClassDef {
    std::uint32_t id = 0;
    std::string name;
    bool operator==(const ClassDef&) const = default;
};

struct ClassSchema {
    std::vector<ClassDef> classes;
    std::vector<std::vector<std::uint32_t>> exclusivity_groups;

    /// Throws Error unless ids are unique, names unique and nonempty,
    /// kUnknownLabel is unused, and every group lists >= 2 declared ids.
    void validate() const;

    bool has_class(std::uint32_t id) const;
    const ClassDef& class_by_id(std::uint32_t id) const;

    /// Declared class ids in ascending order (the bundle channel order).
    std::vector<std::uint32_t> sorted_ids() const;

    /// Classes sharing at least one exclusivity group with `id`, excluding `id`.
    std::set<std::uint32_t> exclusive_partners(std::uint32_t id) const;
};

struct CropMeta {
    /// Classes whose labeling is asserted complete within this crop.
    std::set<std::uint32_t> annotated_classes;
    /// True when crop borders are real world edges (no truncated objects).
    bool closed_world = false;
};

struct LabelVolume {
    Volume<std::uint32_t> volume;
    ClassSchema schema;
    CropMeta meta;
};

struct LabelViolation {
    i64 voxel = -1;  // -1 for metadata-level violations
    std::string rule;
};

/// Empty iff the LabelVolume invariants hold. Violations are data, not errors.
std::vector<LabelViolation> validate_labels(const LabelVolume& lv);

/// Convenience for ops whose precondition is a valid LabelVolume.
void require_valid_labels(const LabelVolume& lv);

}  // namespace hotdist

#endif
