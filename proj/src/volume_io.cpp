#include "hotdist/volume_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <json.hpp>

static_assert(std::endian::native == std::endian::little,
              "payload I/O assumes a little-endian host");

namespace hotdist {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json parse_json_file(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        throw Error(path.string() + ": " + e.what());
    }
    return j;
}

void write_text_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw Error("write failed: " + path.string());
}

const json& require_key(const json& j, const char* key, const fs::path& path) {
    auto it = j.find(key);
    if (it == j.end()) throw Error(path.string() + ": missing key \"" + key + "\"");
    return *it;
}

/// Header filename minus a trailing ".hdvol.json" (or any single extension).
std::string header_stem(const fs::path& header_path) {
    std::string name = header_path.filename().string();
    const std::string suffix = ".hdvol.json";
    if (name.size() > suffix.size() && name.ends_with(suffix)) {
        return name.substr(0, name.size() - suffix.size());
    }
    return header_path.stem().string();
}

template <typename T>
Volume<T> read_payload(const fs::path& payload_path, Shape3 shape, Spacing3 spacing) {
    std::ifstream in(payload_path, std::ios::binary);
    if (!in) throw Error("cannot open payload " + payload_path.string());
    in.seekg(0, std::ios::end);
    const i64 bytes = static_cast<i64>(in.tellg());
    const i64 expected = shape.voxels() * static_cast<i64>(sizeof(T));
    if (bytes != expected) {
        throw Error(payload_path.string() + ": payload is " + std::to_string(bytes) +
                    " bytes, header declares " + std::to_string(expected));
    }
    in.seekg(0, std::ios::beg);
    std::vector<T> data(static_cast<std::size_t>(shape.voxels()));
    in.read(reinterpret_cast<char*>(data.data()), expected);
    if (!in) throw Error("read failed: " + payload_path.string());
    return Volume<T>::from_data(shape, spacing, std::move(data));
}

}  // namespace

AnyVolume read_volume(const fs::path& header_path) {
    if (!fs::exists(header_path)) throw Error("no such file: " + header_path.string());
    json j = parse_json_file(header_path);

    const json& jshape = require_key(j, "shape", header_path);
    const json& jspacing = require_key(j, "spacing", header_path);
    const json& jdtype = require_key(j, "dtype", header_path);
    const json& jdata = require_key(j, "data", header_path);
    if (!jshape.is_array() || jshape.size() != 3) {
        throw Error(header_path.string() + ": shape must be a [z,y,x] array");
    }
    if (!jspacing.is_array() || jspacing.size() != 3) {
        throw Error(header_path.string() + ": spacing must be a [sz,sy,sx] array");
    }

    Shape3 shape{jshape[0].get<i64>(), jshape[1].get<i64>(), jshape[2].get<i64>()};
    Spacing3 spacing{jspacing[0].get<double>(), jspacing[1].get<double>(), jspacing[2].get<double>()};
    if (shape.z < 1 || shape.y < 1 || shape.x < 1) {
        throw Error(header_path.string() + ": shape components must be >= 1");
    }
    if (!(spacing.z > 0.0) || !(spacing.y > 0.0) || !(spacing.x > 0.0)) {
        throw Error(header_path.string() + ": spacing components must be > 0");
    }

    Dtype dtype = dtype_from_name(jdtype.get<std::string>());
    fs::path payload = header_path.parent_path() / jdata.get<std::string>();
    if (!fs::exists(payload)) throw Error("no such payload file: " + payload.string());

    switch (dtype) {
        case Dtype::u8: return read_payload<std::uint8_t>(payload, shape, spacing);
        case Dtype::u32: return read_payload<std::uint32_t>(payload, shape, spacing);
        case Dtype::f32: return read_payload<float>(payload, shape, spacing);
        case Dtype::f64: return read_payload<double>(payload, shape, spacing);
    }
    throw Error("unreachable dtype");
}

void write_volume(const AnyVolume& v, const fs::path& header_path) {
    const std::string stem = header_stem(header_path);
    const std::string payload_name = stem + ".bin";
    const fs::path payload_path = header_path.parent_path() / payload_name;

    std::visit(
        [&](const auto& vol) {
            using T = typename std::decay_t<decltype(vol)>::value_type;

            json j;
            j["shape"] = {vol.shape.z, vol.shape.y, vol.shape.x};
            j["spacing"] = {vol.spacing.z, vol.spacing.y, vol.spacing.x};
            j["dtype"] = dtype_name(dtype_of<T>::value);
            j["data"] = payload_name;
            write_text_file(header_path, j.dump(2) + "\n");

            std::ofstream out(payload_path, std::ios::binary | std::ios::trunc);
            if (!out) throw Error("cannot open " + payload_path.string() + " for writing");
            out.write(reinterpret_cast<const char*>(vol.data.data()),
                      static_cast<std::streamsize>(vol.data.size() * sizeof(T)));
            if (!out) throw Error("write failed: " + payload_path.string());
        },
        v);
}

ClassSchema read_schema(const fs::path& path) {
    if (!fs::exists(path)) throw Error("no such file: " + path.string());
    json j = parse_json_file(path);

    ClassSchema schema;
    for (const auto& jc : require_key(j, "classes", path)) {
        ClassDef c;
        c.id = require_key(jc, "id", path).get<std::uint32_t>();
        c.name = require_key(jc, "name", path).get<std::string>();
        schema.classes.push_back(std::move(c));
    }
    if (j.contains("exclusivity_groups")) {
        for (const auto& jg : j["exclusivity_groups"]) {
            schema.exclusivity_groups.push_back(jg.get<std::vector<std::uint32_t>>());
        }
    }
    try {
        schema.validate();
    } catch (const Error& e) {
        throw Error(path.string() + ": " + e.what());
    }
    return schema;
}

void write_schema(const ClassSchema& schema, const fs::path& path) {
    schema.validate();
    json j;
    j["classes"] = json::array();
    for (const auto& c : schema.classes) {
        j["classes"].push_back({{"id", c.id}, {"name", c.name}});
    }
    j["exclusivity_groups"] = schema.exclusivity_groups;
    write_text_file(path, j.dump(2) + "\n");
}

CropMeta read_crop(const fs::path& path) {
    if (!fs::exists(path)) throw Error("no such file: " + path.string());
    json j = parse_json_file(path);
    CropMeta meta;
    for (const auto& id : require_key(j, "annotated_classes", path)) {
        meta.annotated_classes.insert(id.get<std::uint32_t>());
    }
    meta.closed_world = require_key(j, "closed_world", path).get<bool>();
    return meta;
}

void write_crop(const CropMeta& meta, const fs::path& path) {
    json j;
    j["annotated_classes"] = meta.annotated_classes;
    j["closed_world"] = meta.closed_world;
    write_text_file(path, j.dump(2) + "\n");
}

LabelVolume load_label_volume(const fs::path& labels_header, const fs::path& schema_path,
                              const fs::path& crop_path) {
    LabelVolume lv;
    lv.volume = read_volume_as<std::uint32_t>(labels_header);
    lv.schema = read_schema(schema_path);
    lv.meta = read_crop(crop_path);
    require_valid_labels(lv);
    return lv;
}

}  // namespace hotdist
