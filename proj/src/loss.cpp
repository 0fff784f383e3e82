#include "hotdist/loss.hpp"

#include <cmath>
#include <string>

#include "hotdist/rng.hpp"

namespace hotdist {

namespace {

void check_aligned(const PredictionBundle& pred, const TargetBundle& targets) {
    if (pred.class_ids != targets.class_ids) {
        throw Error("prediction and target bundles disagree on class ids or channel order");
    }
    const std::size_t n = targets.class_ids.size();
    if (pred.hot_logits.size() != n || pred.dist_pred.size() != n || targets.hot.size() != n ||
        targets.hot_mask.size() != n || targets.dist.size() != n || targets.dist_mask.size() != n) {
        throw Error("bundle channel count does not match class id count");
    }
    for (std::size_t k = 0; k < n; ++k) {
        const Shape3 s = targets.hot[k].shape;
        if (pred.hot_logits[k].shape != s || pred.dist_pred[k].shape != s ||
            targets.hot_mask[k].shape != s || targets.dist[k].shape != s ||
            targets.dist_mask[k].shape != s) {
            throw Error("bundle shapes disagree for class id " +
                        std::to_string(targets.class_ids[k]));
        }
    }
}

struct RawEval {
    double total = 0.0;  // masked-mean composite, for traces and reports
    double hot_term = 0.0;
    double dist_term = 0.0;
    std::vector<i64> hot_count, dist_count;
    i64 hot_total = 0, dist_total = 0;
};

/// Shared accumulation pass. When grad buffers are given they receive the
/// UNnormalized per-coordinate gradients (sigmoid(x)-t and 2*lambda*(p-t));
/// callers scale by the masked counts as their reduction requires.
RawEval eval_terms(const PredictionBundle& pred, const TargetBundle& targets,
                   const LossParams& params, std::vector<Volume<double>>* grad_hot,
                   std::vector<Volume<double>>* grad_dist) {
    RawEval ev;
    const std::size_t n = targets.class_ids.size();
    ev.hot_count.assign(n, 0);
    ev.dist_count.assign(n, 0);

    double hot_sum = 0.0;
    double dist_sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        const auto& mask = targets.hot_mask[k];
        const auto& hot = targets.hot[k];
        const auto& x = pred.hot_logits[k];
        for (i64 i = 0; i < mask.voxels(); ++i) {
            if (!mask[i]) continue;
            const double t = static_cast<double>(hot[i]);
            hot_sum += bce_from_logits(x[i], t);
            ++ev.hot_count[k];
            if (grad_hot) (*grad_hot)[k][i] = sigmoid(x[i]) - t;
        }
        ev.hot_total += ev.hot_count[k];
    }
    for (std::size_t k = 0; k < n; ++k) {
        const auto& mask = targets.dist_mask[k];
        const auto& t = targets.dist[k];
        const auto& p = pred.dist_pred[k];
        for (i64 i = 0; i < mask.voxels(); ++i) {
            if (!mask[i]) continue;
            const double diff = p[i] - static_cast<double>(t[i]);
            dist_sum += diff * diff;
            ++ev.dist_count[k];
            if (grad_dist) (*grad_dist)[k][i] = 2.0 * diff * params.lambda_dist;
        }
        ev.dist_total += ev.dist_count[k];
    }

    ev.hot_term = hot_sum / static_cast<double>(std::max<i64>(1, ev.hot_total));
    ev.dist_term = dist_sum / static_cast<double>(std::max<i64>(1, ev.dist_total));
    ev.total = ev.hot_term + params.lambda_dist * ev.dist_term;
    return ev;
}

double total_only(const PredictionBundle& pred, const TargetBundle& targets,
                  const LossParams& params) {
    return eval_terms(pred, targets, params, nullptr, nullptr).total;
}

std::vector<Volume<double>> zero_grads(const TargetBundle& targets) {
    std::vector<Volume<double>> out;
    out.reserve(targets.class_ids.size());
    for (const auto& channel : targets.hot) out.push_back(channel.like<double>());
    return out;
}

void check_loss_params(const LossParams& params) {
    if (!(params.lambda_dist >= 0.0)) throw Error("lambda_dist must be >= 0");
}

}  // namespace

double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double bce_from_logits(double x, double t) {
    return std::max(x, 0.0) - x * t + std::log1p(std::exp(-std::abs(x)));
}

PredictionBundle PredictionBundle::zeros_like(const TargetBundle& targets) {
    PredictionBundle pred;
    pred.class_ids = targets.class_ids;
    for (const auto& channel : targets.hot) {
        pred.hot_logits.push_back(channel.like<double>());
        pred.dist_pred.push_back(channel.like<double>());
    }
    return pred;
}

LossReport hot_distance_loss(const PredictionBundle& pred, const TargetBundle& targets,
                             const LossParams& params) {
    check_loss_params(params);
    check_aligned(pred, targets);

    LossReport report;
    report.grad_hot_logits = zero_grads(targets);
    report.grad_dist = zero_grads(targets);

    RawEval ev = eval_terms(pred, targets, params, &report.grad_hot_logits, &report.grad_dist);
    report.total = ev.total;
    report.hot_term = ev.hot_term;
    report.dist_term = ev.dist_term;
    report.lambda = params.lambda_dist;
    report.class_ids = targets.class_ids;
    report.hot_count = std::move(ev.hot_count);
    report.dist_count = std::move(ev.dist_count);
    report.hot_count_total = ev.hot_total;
    report.dist_count_total = ev.dist_total;

    // Masked-mean gradients: scale the raw per-coordinate values by the
    // term divisor. Counts are >= 1 whenever any coordinate was masked.
    const double hot_div = static_cast<double>(std::max<i64>(1, report.hot_count_total));
    const double dist_div = static_cast<double>(std::max<i64>(1, report.dist_count_total));
    for (std::size_t k = 0; k < targets.class_ids.size(); ++k) {
        auto& gh = report.grad_hot_logits[k];
        auto& gd = report.grad_dist[k];
        const auto& hm = targets.hot_mask[k];
        const auto& dm = targets.dist_mask[k];
        for (i64 i = 0; i < gh.voxels(); ++i) {
            if (hm[i]) gh[i] /= hot_div;
            if (dm[i]) gd[i] /= dist_div;
        }
    }
    return report;
}

double check_gradients(const PredictionBundle& pred, const TargetBundle& targets,
                       const LossParams& params, double epsilon, int trials, std::uint64_t seed) {
    if (!(epsilon > 0.0)) throw Error("epsilon must be > 0");
    if (trials < 1) throw Error("trials must be >= 1");

    LossReport report = hot_distance_loss(pred, targets, params);

    struct Coord {
        bool is_hot;
        std::size_t k;
        i64 i;
    };
    std::vector<Coord> coords;
    for (std::size_t k = 0; k < targets.class_ids.size(); ++k) {
        for (i64 i = 0; i < targets.hot_mask[k].voxels(); ++i) {
            if (targets.hot_mask[k][i]) coords.push_back({true, k, i});
        }
        for (i64 i = 0; i < targets.dist_mask[k].voxels(); ++i) {
            if (targets.dist_mask[k][i]) coords.push_back({false, k, i});
        }
    }
    if (coords.empty()) return 0.0;

    SplitMix64 rng(seed);
    PredictionBundle probe = pred;
    double worst = 0.0;
    for (int trial = 0; trial < trials; ++trial) {
        const Coord c = coords[rng.next_below(coords.size())];
        double& slot = c.is_hot ? probe.hot_logits[c.k][c.i] : probe.dist_pred[c.k][c.i];
        const double saved = slot;

        slot = saved + epsilon;
        const double f_plus = total_only(probe, targets, params);
        slot = saved - epsilon;
        const double f_minus = total_only(probe, targets, params);
        slot = saved;

        const double numeric = (f_plus - f_minus) / (2.0 * epsilon);
        const double analytic = c.is_hot ? report.grad_hot_logits[c.k][c.i]
                                         : report.grad_dist[c.k][c.i];
        const double denom = std::max(std::abs(analytic), std::abs(numeric));
        const double rel = denom > 0.0 ? std::abs(analytic - numeric) / denom : 0.0;
        if (rel > worst) worst = rel;
    }
    return worst;
}

FitResult fit_predictions(const TargetBundle& targets, const LossParams& params, double step,
                          int iters, PredictionBundle init) {
    check_loss_params(params);
    if (!(step > 0.0)) throw Error("step must be > 0");
    if (iters < 1) throw Error("iters must be >= 1");
    check_aligned(init, targets);

    FitResult result;
    result.pred = std::move(init);
    result.trace.reserve(static_cast<std::size_t>(iters) + 1);

    std::vector<Volume<double>> grad_hot = zero_grads(targets);
    std::vector<Volume<double>> grad_dist = zero_grads(targets);

    RawEval ev = eval_terms(result.pred, targets, params, &grad_hot, &grad_dist);
    result.trace.push_back(ev.total);
    if (!std::isfinite(ev.total)) {
        throw DivergenceError("non-finite loss at initialization");
    }

    for (int it = 1; it <= iters; ++it) {
        for (std::size_t k = 0; k < targets.class_ids.size(); ++k) {
            auto& x = result.pred.hot_logits[k];
            auto& p = result.pred.dist_pred[k];
            const auto& hm = targets.hot_mask[k];
            const auto& dm = targets.dist_mask[k];
            for (i64 i = 0; i < x.voxels(); ++i) {
                if (hm[i]) x[i] -= step * grad_hot[k][i];
                if (dm[i]) p[i] -= step * grad_dist[k][i];
            }
        }
        ev = eval_terms(result.pred, targets, params, &grad_hot, &grad_dist);
        result.trace.push_back(ev.total);
        if (!std::isfinite(ev.total)) {
            throw DivergenceError("non-finite loss at iteration " + std::to_string(it) +
                                  " (step too large)");
        }
    }
    return result;
}

}  // namespace hotdist
