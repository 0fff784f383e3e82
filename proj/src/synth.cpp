#include "hotdist/synth.hpp"

#include <algorithm>
#include <string>

namespace hotdist {

namespace {

const ClassDef* find_background(const ClassSchema& schema) {
    for (const auto& c : schema.classes) {
        if (c.name == "background") return &c;
    }
    return nullptr;
}

}  // namespace

LabelVolume gen_spheres(Shape3 shape, Spacing3 spacing, const std::vector<SphereSpec>& specs,
                        const ClassSchema& schema) {
    schema.validate();
    for (const auto& spec : specs) {
        if (!(spec.radius > 0.0)) throw Error("sphere radius must be > 0");
        if (!schema.has_class(spec.class_id)) {
            throw Error("sphere class id " + std::to_string(spec.class_id) +
                        " is not in the schema");
        }
    }

    const ClassDef* background = find_background(schema);
    const std::uint32_t fill = background ? background->id : kUnknownLabel;

    LabelVolume lv;
    lv.volume = Volume<std::uint32_t>(shape, spacing, fill);
    lv.schema = schema;
    lv.meta.closed_world = true;
    if (background) lv.meta.annotated_classes.insert(background->id);
    for (const auto& spec : specs) lv.meta.annotated_classes.insert(spec.class_id);

    i64 i = 0;
    for (i64 z = 0; z < shape.z; ++z) {
        for (i64 y = 0; y < shape.y; ++y) {
            for (i64 x = 0; x < shape.x; ++x, ++i) {
                const double pz = static_cast<double>(z) * spacing.z;
                const double py = static_cast<double>(y) * spacing.y;
                const double px = static_cast<double>(x) * spacing.x;

                const SphereSpec* owner = nullptr;
                for (const auto& spec : specs) {
                    const double dz = pz - spec.cz;
                    const double dy = py - spec.cy;
                    const double dx = px - spec.cx;
                    if (dz * dz + dy * dy + dx * dx > spec.radius * spec.radius) continue;
                    if (!owner) {
                        owner = &spec;
                        continue;
                    }
                    if (spec.class_id != owner->class_id) {
                        const auto partners = schema.exclusive_partners(owner->class_id);
                        if (partners.count(spec.class_id)) {
                            throw Error("spheres of mutually exclusive classes " +
                                        std::to_string(owner->class_id) + " and " +
                                        std::to_string(spec.class_id) + " overlap at voxel " +
                                        std::to_string(i));
                        }
                    }
                }
                if (owner) lv.volume[i] = owner->class_id;
            }
        }
    }
    return lv;
}

LabelVolume sparsify(const LabelVolume& lv, const SparsifySpec& spec) {
    for (std::uint32_t kept : spec.keep_classes) {
        if (std::find(spec.hidden_classes.begin(), spec.hidden_classes.end(), kept) !=
            spec.hidden_classes.end()) {
            throw Error("class " + std::to_string(kept) + " listed as both kept and hidden");
        }
    }

    LabelVolume out = lv;
    for (std::uint32_t hidden : spec.hidden_classes) {
        out.meta.annotated_classes.erase(hidden);
        for (i64 i = 0; i < out.volume.voxels(); ++i) {
            if (out.volume[i] == hidden) out.volume[i] = kUnknownLabel;
        }
    }
    return out;
}

}  // namespace hotdist
