#include "hotdist/bundle_io.hpp"

#include <fstream>
#include <json.hpp>

#include "hotdist/volume_io.hpp"

namespace hotdist {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void check_channel_order(const std::vector<std::uint32_t>& class_ids, const fs::path& origin) {
    for (std::size_t k = 1; k < class_ids.size(); ++k) {
        if (class_ids[k - 1] >= class_ids[k]) {
            throw Error(origin.string() + ": class_ids must be strictly ascending");
        }
    }
}

template <typename T>
std::vector<std::string> write_channel_set(const std::vector<Volume<T>>& channels,
                                           const std::vector<std::uint32_t>& class_ids,
                                           const std::string& tag, const fs::path& dir) {
    std::vector<std::string> names;
    for (std::size_t k = 0; k < channels.size(); ++k) {
        std::string name = tag + "_c" + std::to_string(class_ids[k]) + ".hdvol.json";
        write_volume(channels[k], dir / name);
        names.push_back(std::move(name));
    }
    return names;
}

template <typename T>
std::vector<Volume<T>> read_channel_set(const json& j, const char* tag, std::size_t expected,
                                        const fs::path& manifest_path) {
    if (!j.contains(tag)) {
        throw Error(manifest_path.string() + ": channels missing \"" + tag + "\"");
    }
    const auto paths = j.at(tag).get<std::vector<std::string>>();
    if (paths.size() != expected) {
        throw Error(manifest_path.string() + ": \"" + std::string(tag) + "\" lists " +
                    std::to_string(paths.size()) + " channels, expected " +
                    std::to_string(expected));
    }
    std::vector<Volume<T>> out;
    out.reserve(expected);
    for (const auto& rel : paths) {
        out.push_back(read_volume_as<T>(manifest_path.parent_path() / rel));
    }
    for (std::size_t k = 1; k < out.size(); ++k) {
        if (out[k].shape != out[0].shape || out[k].spacing != out[0].spacing) {
            throw Error(manifest_path.string() + ": channel geometry mismatch in \"" +
                        std::string(tag) + "\"");
        }
    }
    return out;
}

json parse_manifest(const fs::path& path) {
    if (!fs::exists(path)) throw Error("no such file: " + path.string());
    std::ifstream in(path);
    if (!in) throw Error("cannot open " + path.string());
    try {
        json j;
        in >> j;
        return j;
    } catch (const json::exception& e) {
        throw Error(path.string() + ": " + e.what());
    }
}

void write_json_file(const json& j, const fs::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << j.dump(2) << "\n";
    if (!out) throw Error("write failed: " + path.string());
}

}  // namespace

void write_target_bundle(const TargetBundle& bundle, const fs::path& manifest_path) {
    check_channel_order(bundle.class_ids, manifest_path);
    const fs::path dir = manifest_path.parent_path();

    json j;
    j["class_ids"] = bundle.class_ids;
    j["channels"]["hot"] = write_channel_set(bundle.hot, bundle.class_ids, "hot", dir);
    j["channels"]["hot_mask"] =
        write_channel_set(bundle.hot_mask, bundle.class_ids, "hot_mask", dir);
    j["channels"]["dist"] = write_channel_set(bundle.dist, bundle.class_ids, "dist", dir);
    j["channels"]["dist_mask"] =
        write_channel_set(bundle.dist_mask, bundle.class_ids, "dist_mask", dir);
    j["scale"] = bundle.scale;
    write_json_file(j, manifest_path);
}

TargetBundle read_target_bundle(const fs::path& manifest_path) {
    json j = parse_manifest(manifest_path);

    TargetBundle bundle;
    bundle.class_ids = j.at("class_ids").get<std::vector<std::uint32_t>>();
    check_channel_order(bundle.class_ids, manifest_path);
    const json& channels = j.at("channels");
    const std::size_t n = bundle.class_ids.size();
    bundle.hot = read_channel_set<float>(channels, "hot", n, manifest_path);
    bundle.hot_mask = read_channel_set<std::uint8_t>(channels, "hot_mask", n, manifest_path);
    bundle.dist = read_channel_set<float>(channels, "dist", n, manifest_path);
    bundle.dist_mask = read_channel_set<std::uint8_t>(channels, "dist_mask", n, manifest_path);
    bundle.scale = j.at("scale").get<double>();
    if (!(bundle.scale > 0.0)) throw Error(manifest_path.string() + ": scale must be > 0");

    // Value invariants hold wherever the corresponding mask is on.
    for (std::size_t k = 0; k < n; ++k) {
        if (bundle.hot[k].shape != bundle.dist[k].shape ||
            bundle.hot[k].shape != bundle.hot_mask[k].shape ||
            bundle.hot[k].shape != bundle.dist_mask[k].shape) {
            throw Error(manifest_path.string() + ": channel sets disagree on shape");
        }
        for (i64 i = 0; i < bundle.hot[k].voxels(); ++i) {
            if (bundle.hot_mask[k][i] && bundle.hot[k][i] != 0.0f && bundle.hot[k][i] != 1.0f) {
                throw Error(manifest_path.string() + ": masked hot value is not 0 or 1 (class " +
                            std::to_string(bundle.class_ids[k]) + ", voxel " + std::to_string(i) +
                            ")");
            }
            if (bundle.dist_mask[k][i] &&
                !(bundle.dist[k][i] >= -1.0f && bundle.dist[k][i] <= 1.0f)) {
                throw Error(manifest_path.string() +
                            ": masked dist value outside [-1,1] (class " +
                            std::to_string(bundle.class_ids[k]) + ", voxel " + std::to_string(i) +
                            ")");
            }
        }
    }
    return bundle;
}

void write_prediction_bundle(const PredictionBundle& pred, const fs::path& manifest_path) {
    check_channel_order(pred.class_ids, manifest_path);
    const fs::path dir = manifest_path.parent_path();

    json j;
    j["class_ids"] = pred.class_ids;
    j["channels"]["hot_logits"] =
        write_channel_set(pred.hot_logits, pred.class_ids, "hot_logits", dir);
    j["channels"]["dist_pred"] =
        write_channel_set(pred.dist_pred, pred.class_ids, "dist_pred", dir);
    write_json_file(j, manifest_path);
}

PredictionBundle read_prediction_bundle(const fs::path& manifest_path) {
    json j = parse_manifest(manifest_path);

    PredictionBundle pred;
    pred.class_ids = j.at("class_ids").get<std::vector<std::uint32_t>>();
    check_channel_order(pred.class_ids, manifest_path);
    const json& channels = j.at("channels");
    const std::size_t n = pred.class_ids.size();
    pred.hot_logits = read_channel_set<double>(channels, "hot_logits", n, manifest_path);
    pred.dist_pred = read_channel_set<double>(channels, "dist_pred", n, manifest_path);
    return pred;
}

void write_loss_report(const LossReport& report, const fs::path& path) {
    json counts;
    counts["hot"] = json::object();
    counts["dist"] = json::object();
    for (std::size_t k = 0; k < report.hot_count.size(); ++k) {
        counts["hot"][std::to_string(report.class_ids[k])] = report.hot_count[k];
    }
    for (std::size_t k = 0; k < report.dist_count.size(); ++k) {
        counts["dist"][std::to_string(report.class_ids[k])] = report.dist_count[k];
    }
    counts["hot_total"] = report.hot_count_total;
    counts["dist_total"] = report.dist_count_total;

    json j;
    j["total"] = report.total;
    j["hot_term"] = report.hot_term;
    j["dist_term"] = report.dist_term;
    j["lambda"] = report.lambda;
    j["counts"] = counts;
    write_json_file(j, path);
}

}  // namespace hotdist
