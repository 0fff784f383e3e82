#include "hotdist/schema.hpp"

#include <algorithm>
#include <sstream>
#include <unordered_set>

namespace hotdist {

void ClassSchema::validate() const {
    std::unordered_set<std::uint32_t> ids;
    std::unordered_set<std::string> names;
    for (const auto& c : classes) {
        if (c.id == kUnknownLabel) {
            throw Error("class id " + std::to_string(kUnknownLabel) +
                        " is the reserved unknown-label sentinel");
        }
        if (!ids.insert(c.id).second) {
            throw Error("duplicate class id " + std::to_string(c.id));
        }
        if (c.name.empty()) {
            throw Error("class " + std::to_string(c.id) + " has an empty name");
        }
        if (!names.insert(c.name).second) {
            throw Error("duplicate class name \"" + c.name + "\"");
        }
    }
    for (const auto& group : exclusivity_groups) {
        if (group.size() < 2) {
            throw Error("exclusivity group must have >= 2 members");
        }
        std::unordered_set<std::uint32_t> members;
        for (std::uint32_t id : group) {
            if (!ids.count(id)) {
                throw Error("exclusivity group references undeclared class id " +
                            std::to_string(id));
            }
            if (!members.insert(id).second) {
                throw Error("exclusivity group lists class id " + std::to_string(id) + " twice");
            }
        }
    }
}

bool ClassSchema::has_class(std::uint32_t id) const {
    return std::any_of(classes.begin(), classes.end(),
                       [id](const ClassDef& c) { return c.id == id; });
}

const ClassDef& ClassSchema::class_by_id(std::uint32_t id) const {
    for (const auto& c : classes) {
        if (c.id == id) return c;
    }
    throw Error("no class with id " + std::to_string(id));
}

std::vector<std::uint32_t> ClassSchema::sorted_ids() const {
    std::vector<std::uint32_t> ids;
    ids.reserve(classes.size());
    for (const auto& c : classes) ids.push_back(c.id);
    std::sort(ids.begin(), ids.end());
    return ids;
}

std::set<std::uint32_t> ClassSchema::exclusive_partners(std::uint32_t id) const {
    std::set<std::uint32_t> partners;
    for (const auto& group : exclusivity_groups) {
        if (std::find(group.begin(), group.end(), id) == group.end()) continue;
        for (std::uint32_t member : group) {
            if (member != id) partners.insert(member);
        }
    }
    return partners;
}

std::vector<LabelViolation> validate_labels(const LabelVolume& lv) {
    std::vector<LabelViolation> out;

    for (std::uint32_t id : lv.meta.annotated_classes) {
        if (!lv.schema.has_class(id)) {
            out.push_back({-1, "annotated class id " + std::to_string(id) + " is not in the schema"});
        }
    }

    std::unordered_set<std::uint32_t> ids;
    for (const auto& c : lv.schema.classes) ids.insert(c.id);

    const auto& data = lv.volume.data;
    for (i64 i = 0; i < lv.volume.voxels(); ++i) {
        std::uint32_t value = data[static_cast<std::size_t>(i)];
        if (value == kUnknownLabel) continue;
        if (!ids.count(value)) {
            out.push_back({i, "voxel value " + std::to_string(value) + " is not a declared class id"});
        }
    }
    return out;
}

void require_valid_labels(const LabelVolume& lv) {
    lv.schema.validate();
    auto violations = validate_labels(lv);
    if (violations.empty()) return;
    std::ostringstream msg;
    msg << "label volume has " << violations.size() << " violation(s); first: ";
    if (violations.front().voxel >= 0) msg << "voxel " << violations.front().voxel << ": ";
    msg << violations.front().rule;
    throw Error(msg.str());
}

}  // namespace hotdist
