/* hotdist command-line front end.
 *
 * Subcommands: gen, targets, loss, fit, segment. Every subcommand accepts
 * --config <file.json>, a flat JSON object supplying any flag; flags given
 * on the command line win. Exit codes: 0 success, 2 input/validation error,
 * 3 verification failure, 4 numerical divergence. HOTDIST_THREADS caps
 * worker parallelism (default: machine cores).
 */

#include <CLI11.hpp>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>

#include "hotdist/bundle_io.hpp"
#include "hotdist/loss.hpp"
#include "hotdist/postprocess.hpp"
#include "hotdist/rng.hpp"
#include "hotdist/synth.hpp"
#include "hotdist/targets.hpp"
#include "hotdist/volume_io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitVerify = 3;
constexpr int kExitDiverged = 4;

/// Flat JSON object -> CLI11 config items, so experiment manifests can
/// carry every flag. Values are rendered exactly as written in the file.
/// CLI11 reads config files at the top level only, so each key is fanned
/// out to every subcommand; unmatched keys are ignored and the parsed
/// subcommand picks up the ones it owns.
class JsonConfig : public CLI::Config {
  public:
    explicit JsonConfig(std::vector<std::string> subcommands)
        : subcommands_(std::move(subcommands)) {}

    std::string to_config(const CLI::App*, bool, bool, std::string) const override {
        return "{}\n";
    }

    std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
        json j;
        try {
            input >> j;
        } catch (const json::exception& e) {
            throw CLI::FileError(std::string("config is not valid JSON: ") + e.what());
        }
        if (!j.is_object()) throw CLI::FileError("config must be a JSON object");

        std::vector<CLI::ConfigItem> items;
        for (const auto& [key, value] : j.items()) {
            CLI::ConfigItem item;
            item.name = key;
            if (value.is_string()) {
                item.inputs = {value.get<std::string>()};
            } else if (value.is_boolean()) {
                item.inputs = {value.get<bool>() ? "true" : "false"};
            } else if (value.is_array()) {
                for (const auto& e : value) {
                    item.inputs.push_back(e.is_string() ? e.get<std::string>() : e.dump());
                }
            } else {
                item.inputs = {value.dump()};
            }
            for (const auto& sub : subcommands_) {
                item.parents = {sub};
                items.push_back(item);
            }
        }
        return items;
    }

  private:
    std::vector<std::string> subcommands_;
};

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

// ---------------------------------------------------------------- gen ----

struct GenArgs {
    std::string spec_path;
    std::string out_dir;
};

hotdist::ClassSchema schema_from_json(const json& j) {
    hotdist::ClassSchema schema;
    for (const auto& jc : j.at("classes")) {
        schema.classes.push_back(
            {jc.at("id").get<std::uint32_t>(), jc.at("name").get<std::string>()});
    }
    if (j.contains("exclusivity_groups")) {
        for (const auto& jg : j.at("exclusivity_groups")) {
            schema.exclusivity_groups.push_back(jg.get<std::vector<std::uint32_t>>());
        }
    }
    schema.validate();
    return schema;
}

/// Rejection-sample sphere placements; overlap against mutually exclusive
/// classes is checked geometrically (center distance < radius sum) which is
/// conservative relative to the voxel-level rule.
std::vector<hotdist::SphereSpec> place_random_spheres(const json& spec,
                                                      const hotdist::ClassSchema& schema,
                                                      hotdist::Shape3 shape,
                                                      hotdist::Spacing3 spacing,
                                                      std::vector<hotdist::SphereSpec> placed) {
    const auto count = spec.at("count").get<int>();
    const auto classes = spec.at("classes").get<std::vector<std::uint32_t>>();
    const auto radius = spec.at("radius").get<std::vector<double>>();
    const auto seed = spec.at("seed").get<std::uint64_t>();
    const int max_attempts = spec.value("max_attempts", 200);
    if (classes.empty() || radius.size() != 2 || !(radius[0] > 0) || radius[1] < radius[0]) {
        throw hotdist::Error("random_spheres needs classes and a radius range [lo, hi]");
    }

    hotdist::SplitMix64 rng(seed);
    const double ez = static_cast<double>(shape.z - 1) * spacing.z;
    const double ey = static_cast<double>(shape.y - 1) * spacing.y;
    const double ex = static_cast<double>(shape.x - 1) * spacing.x;

    std::vector<hotdist::SphereSpec> result = std::move(placed);
    for (int n = 0; n < count; ++n) {
        bool ok = false;
        for (int attempt = 0; attempt < max_attempts && !ok; ++attempt) {
            hotdist::SphereSpec candidate{rng.next_in(0.0, ez), rng.next_in(0.0, ey),
                                          rng.next_in(0.0, ex),
                                          rng.next_in(radius[0], radius[1]),
                                          classes[rng.next_below(classes.size())]};
            ok = true;
            const auto partners = schema.exclusive_partners(candidate.class_id);
            for (const auto& other : result) {
                if (!partners.count(other.class_id)) continue;
                const double dz = other.cz - candidate.cz;
                const double dy = other.cy - candidate.cy;
                const double dx = other.cx - candidate.cx;
                const double reach = other.radius + candidate.radius;
                if (dz * dz + dy * dy + dx * dx < reach * reach) {
                    ok = false;
                    break;
                }
            }
            if (ok) result.push_back(candidate);
        }
        if (!ok) {
            throw hotdist::Error("could not place random sphere " + std::to_string(n + 1) +
                                 " without exclusive overlap; relax the spec");
        }
    }
    return result;
}

int cmd_gen(const GenArgs& args) {
    std::ifstream in(args.spec_path);
    if (!in) throw hotdist::Error("no such file: " + args.spec_path);
    json spec;
    try {
        in >> spec;
    } catch (const json::exception& e) {
        throw hotdist::Error(args.spec_path + ": " + e.what());
    }

    const auto jshape = spec.at("shape").get<std::vector<hotdist::i64>>();
    const auto jspacing = spec.value("spacing", std::vector<double>{1.0, 1.0, 1.0});
    if (jshape.size() != 3 || jspacing.size() != 3) {
        throw hotdist::Error("gen spec: shape and spacing must be [z,y,x]");
    }
    const hotdist::Shape3 shape{jshape[0], jshape[1], jshape[2]};
    const hotdist::Spacing3 spacing{jspacing[0], jspacing[1], jspacing[2]};
    hotdist::ClassSchema schema = schema_from_json(spec);

    std::vector<hotdist::SphereSpec> spheres;
    if (spec.contains("spheres")) {
        for (const auto& js : spec.at("spheres")) {
            const auto c = js.at("center").get<std::vector<double>>();
            if (c.size() != 3) throw hotdist::Error("sphere center must be [z,y,x]");
            spheres.push_back({c[0], c[1], c[2], js.at("radius").get<double>(),
                               js.at("class_id").get<std::uint32_t>()});
        }
    }
    if (spec.contains("random_spheres")) {
        spheres = place_random_spheres(spec.at("random_spheres"), schema, shape, spacing,
                                       std::move(spheres));
    }

    hotdist::LabelVolume lv = hotdist::gen_spheres(shape, spacing, spheres, schema);
    if (spec.contains("sparsify")) {
        const json& js = spec.at("sparsify");
        hotdist::SparsifySpec sp;
        sp.keep_classes = js.value("keep_classes", std::vector<std::uint32_t>{});
        sp.hidden_classes = js.value("hidden_classes", std::vector<std::uint32_t>{});
        sp.seed = js.value("seed", std::uint64_t{0});
        lv = hotdist::sparsify(lv, sp);
    }

    const fs::path dir(args.out_dir);
    fs::create_directories(dir);
    hotdist::write_volume(lv.volume, dir / "labels.hdvol.json");
    hotdist::write_schema(lv.schema, dir / "labels.schema.json");
    hotdist::write_crop(lv.meta, dir / "labels.crop.json");

    json manifest;
    manifest["labels"] = "labels.hdvol.json";
    manifest["schema"] = "labels.schema.json";
    manifest["crop"] = "labels.crop.json";
    manifest["spheres"] = spheres.size();
    std::ofstream mf(dir / "fixture.json", std::ios::binary | std::ios::trunc);
    mf << manifest.dump(2) << "\n";

    std::cout << "wrote " << (dir / "labels.hdvol.json").string() << " (" << spheres.size()
              << " spheres, " << schema.classes.size() << " classes)\n";
    return kExitOk;
}

// ------------------------------------------------------------- targets ----

struct TargetsArgs {
    std::string labels, schema, crop, out_dir;
    double scale = 0.0;  // 0 = auto: 10 * min(spacing)
    bool border_masking = false;
};

int cmd_targets(const TargetsArgs& args) {
    hotdist::LabelVolume lv = hotdist::load_label_volume(args.labels, args.schema, args.crop);

    hotdist::DistanceParams params;
    params.scale = args.scale > 0.0 ? args.scale
                                    : hotdist::DistanceParams::default_scale(lv.volume.spacing);
    params.border_masking = args.border_masking;

    hotdist::TargetBundle bundle = hotdist::build_targets(lv, params);

    const fs::path dir(args.out_dir);
    fs::create_directories(dir);
    hotdist::write_target_bundle(bundle, dir / "targets.json");

    const double voxels = static_cast<double>(lv.volume.voxels());
    for (std::size_t k = 0; k < bundle.num_classes(); ++k) {
        hotdist::i64 hot_n = 0, dist_n = 0;
        for (auto v : bundle.hot_mask[k].data) hot_n += v;
        for (auto v : bundle.dist_mask[k].data) dist_n += v;
        std::printf("class %u (%s): hot_mask %.1f%%  dist_mask %.1f%%\n", bundle.class_ids[k],
                    lv.schema.class_by_id(bundle.class_ids[k]).name.c_str(),
                    100.0 * static_cast<double>(hot_n) / voxels,
                    100.0 * static_cast<double>(dist_n) / voxels);
    }
    std::cout << "wrote " << (dir / "targets.json").string() << " (scale "
              << format_double(params.scale) << ")\n";
    return kExitOk;
}

// ---------------------------------------------------------------- loss ----

struct LossArgs {
    std::string pred, targets, out_json, grad_dir;
    double lambda = 1.0;
    bool check_grad = false;
    double epsilon = 1e-5;
    int trials = 200;
};

int cmd_loss(const LossArgs& args) {
    hotdist::PredictionBundle pred = hotdist::read_prediction_bundle(args.pred);
    hotdist::TargetBundle targets = hotdist::read_target_bundle(args.targets);
    const hotdist::LossParams params{args.lambda};

    hotdist::LossReport report = hotdist::hot_distance_loss(pred, targets, params);
    std::cout << "total " << format_double(report.total) << "  hot "
              << format_double(report.hot_term) << "  dist " << format_double(report.dist_term)
              << "  (lambda " << format_double(report.lambda) << ")\n";

    if (!args.grad_dir.empty()) {
        const fs::path dir(args.grad_dir);
        fs::create_directories(dir);
        for (std::size_t k = 0; k < report.class_ids.size(); ++k) {
            const std::string id = std::to_string(report.class_ids[k]);
            hotdist::write_volume(report.grad_hot_logits[k],
                                  dir / ("grad_hot_c" + id + ".hdvol.json"));
            hotdist::write_volume(report.grad_dist[k],
                                  dir / ("grad_dist_c" + id + ".hdvol.json"));
        }
    }

    double grad_error = 0.0;
    if (args.check_grad) {
        grad_error =
            hotdist::check_gradients(pred, targets, params, args.epsilon, args.trials);
        std::cout << "grad check: max relative error " << format_double(grad_error)
                  << " (epsilon " << format_double(args.epsilon) << ", trials " << args.trials
                  << ")\n";
    }

    if (!args.out_json.empty()) {
        hotdist::write_loss_report(report, args.out_json);
        if (args.check_grad) {
            // Append the verification block to the written report.
            std::ifstream in(args.out_json);
            json j;
            in >> j;
            in.close();
            j["grad_check"] = {{"epsilon", args.epsilon},
                               {"trials", args.trials},
                               {"max_rel_error", grad_error}};
            std::ofstream out(args.out_json, std::ios::binary | std::ios::trunc);
            out << j.dump(2) << "\n";
        }
    }

    if (args.check_grad && grad_error >= 1e-4) {
        std::cerr << "gradient verification failed: " << format_double(grad_error)
                  << " >= 1e-4\n";
        return kExitVerify;
    }
    return kExitOk;
}

// ----------------------------------------------------------------- fit ----

struct FitArgs {
    std::string targets, out_dir;
    double lambda = 1.0;
    double step = 0.5;
    int iters = 1000;
};

int cmd_fit(const FitArgs& args) {
    hotdist::TargetBundle targets = hotdist::read_target_bundle(args.targets);
    hotdist::PredictionBundle init = hotdist::PredictionBundle::zeros_like(targets);

    hotdist::FitResult result =
        hotdist::fit_predictions(targets, hotdist::LossParams{args.lambda}, args.step,
                                 args.iters, std::move(init));

    const fs::path dir(args.out_dir);
    fs::create_directories(dir);
    hotdist::write_prediction_bundle(result.pred, dir / "predictions.json");

    std::ofstream csv(dir / "loss_trace.csv", std::ios::binary | std::ios::trunc);
    csv << "iter,total\n";
    for (std::size_t i = 0; i < result.trace.size(); ++i) {
        csv << i << "," << format_double(result.trace[i]) << "\n";
    }

    std::cout << "final loss " << format_double(result.trace.back()) << " after " << args.iters
              << " iterations; wrote " << (dir / "predictions.json").string() << "\n";
    return kExitOk;
}

// ------------------------------------------------------------- segment ----

struct SegmentArgs {
    std::string dist, out_dir, truth;
    double t_seed = 0.5;
    double t_mask = 0.0;
    int connectivity = 26;
    std::uint32_t truth_class = 1;
};

int cmd_segment(const SegmentArgs& args) {
    hotdist::AnyVolume any = hotdist::read_volume(args.dist);
    hotdist::Volume<float> dist;
    if (auto* f = std::get_if<hotdist::Volume<float>>(&any)) {
        dist = std::move(*f);
    } else if (auto* d = std::get_if<hotdist::Volume<double>>(&any)) {
        dist = hotdist::Volume<float>(d->shape, d->spacing);
        for (hotdist::i64 i = 0; i < d->voxels(); ++i) {
            dist[i] = static_cast<float>((*d)[i]);
        }
    } else {
        throw hotdist::Error(args.dist + ": distance channel must be f32 or f64");
    }

    hotdist::WatershedParams params;
    params.t_seed = args.t_seed;
    params.t_mask = args.t_mask;
    params.connectivity = args.connectivity;
    params.validate();

    hotdist::Volume<std::uint8_t> semantic = hotdist::threshold_semantic(dist, params.t_mask);
    hotdist::InstanceMap instances = hotdist::watershed_instances(dist, params);

    const fs::path dir(args.out_dir);
    fs::create_directories(dir);
    hotdist::write_volume(semantic, dir / "semantic.hdvol.json");
    hotdist::write_volume(instances.labels, dir / "instances.hdvol.json");

    if (!args.truth.empty()) {
        auto labels = hotdist::read_volume_as<std::uint32_t>(args.truth);
        hotdist::Volume<std::uint8_t> truth_mask(labels.shape, labels.spacing);
        for (hotdist::i64 i = 0; i < labels.voxels(); ++i) {
            truth_mask[i] = labels[i] == args.truth_class ? 1 : 0;
        }
        const double dice = hotdist::dice_score(semantic, truth_mask);
        json metrics;
        metrics["dice"][std::to_string(args.truth_class)] = dice;
        std::ofstream mf(dir / "metrics.json", std::ios::binary | std::ios::trunc);
        mf << metrics.dump(2) << "\n";
        std::cout << "dice vs class " << args.truth_class << ": " << format_double(dice) << "\n";
    }

    std::cout << "instances: " << instances.count << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "hotdist: one-hot + signed tanh boundary-distance segmentation targets,\n"
        "masked composite loss with analytic gradients, and watershed post-processing.\n"
        "HOTDIST_THREADS caps worker parallelism (default: machine cores)."};
    app.require_subcommand(1);
    app.config_formatter(std::make_shared<JsonConfig>(
        std::vector<std::string>{"gen", "targets", "loss", "fit", "segment"}));
    app.set_config("--config", "", "JSON object supplying any flag (explicit flags win)");

    GenArgs gen_args;
    auto* gen = app.add_subcommand("gen", "Generate a synthetic labeled fixture");
    gen->fallthrough();
    gen->add_option("--spec", gen_args.spec_path, "Fixture spec JSON")->required();
    gen->add_option("--out-dir", gen_args.out_dir, "Output directory")->required();

    TargetsArgs targets_args;
    auto* targets = app.add_subcommand("targets", "Build hot + tanh-distance training targets");
    targets->fallthrough();
    targets->add_option("--labels", targets_args.labels, "Label volume header (.hdvol.json)")
        ->required();
    targets->add_option("--schema", targets_args.schema, "Class schema (.schema.json)")
        ->required();
    targets->add_option("--crop", targets_args.crop, "Crop metadata (.crop.json)")->required();
    targets->add_option("--scale", targets_args.scale,
                        "tanh distance scale, physical units (default: 10 * min spacing)")
        ->check(CLI::PositiveNumber);
    targets->add_flag("--border-masking", targets_args.border_masking,
                      "Mask distances invalidated by crop truncation (open-world crops)");
    targets->add_option("--out-dir", targets_args.out_dir, "Output directory")->required();

    LossArgs loss_args;
    auto* loss = app.add_subcommand("loss", "Evaluate the masked composite loss");
    loss->fallthrough();
    loss->add_option("--pred", loss_args.pred, "Prediction bundle manifest")->required();
    loss->add_option("--targets", loss_args.targets, "Target bundle manifest")->required();
    loss->add_option("--lambda", loss_args.lambda, "Distance term weight (default 1)")
        ->check(CLI::NonNegativeNumber);
    loss->add_option("--out", loss_args.out_json, "Write the loss report JSON here");
    loss->add_option("--grad-out", loss_args.grad_dir,
                     "Write per-class gradient volumes into this directory");
    loss->add_flag("--check-grad", loss_args.check_grad,
                   "Verify analytic gradients against central differences (exit 3 on failure)");
    loss->add_option("--epsilon", loss_args.epsilon, "Finite-difference step (default 1e-5)")
        ->check(CLI::PositiveNumber);
    loss->add_option("--trials", loss_args.trials, "Probed masked coordinates (default 200)")
        ->check(CLI::PositiveNumber);

    FitArgs fit_args;
    auto* fit = app.add_subcommand(
        "fit", "Gradient-descend zero-initialized predictions onto a target bundle");
    fit->fallthrough();
    fit->add_option("--targets", fit_args.targets, "Target bundle manifest")->required();
    fit->add_option("--lambda", fit_args.lambda, "Distance term weight (default 1)")
        ->check(CLI::NonNegativeNumber);
    fit->add_option("--step", fit_args.step, "Descent step (default 0.5)")
        ->check(CLI::PositiveNumber);
    fit->add_option("--iters", fit_args.iters, "Iterations (default 1000)")
        ->check(CLI::PositiveNumber);
    fit->add_option("--out-dir", fit_args.out_dir, "Output directory")->required();

    SegmentArgs segment_args;
    auto* segment = app.add_subcommand(
        "segment", "Threshold a distance channel and split instances by watershed");
    segment->fallthrough();
    segment->add_option("--dist", segment_args.dist, "Distance channel header (.hdvol.json)")
        ->required();
    segment->add_option("--t-seed", segment_args.t_seed, "Seed threshold (default 0.5)");
    segment->add_option("--t-mask", segment_args.t_mask, "Region threshold (default 0.0)");
    segment->add_option("--connectivity", segment_args.connectivity, "6 or 26 (default 26)");
    segment->add_option("--truth", segment_args.truth,
                        "Ground-truth label volume; emits metrics.json with the Dice score");
    segment->add_option("--truth-class", segment_args.truth_class,
                        "Class id scored against the semantic mask (default 1)");
    segment->add_option("--out-dir", segment_args.out_dir, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInput;
    }

    try {
        if (gen->parsed()) return cmd_gen(gen_args);
        if (targets->parsed()) return cmd_targets(targets_args);
        if (loss->parsed()) return cmd_loss(loss_args);
        if (fit->parsed()) return cmd_fit(fit_args);
        if (segment->parsed()) return cmd_segment(segment_args);
    } catch (const hotdist::DivergenceError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitDiverged;
    } catch (const hotdist::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInput;
    }
    return kExitInput;
}
