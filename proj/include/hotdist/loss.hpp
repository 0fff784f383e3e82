/* Masked composite loss over a prediction bundle: binary cross-entropy from
 * logits on the one-hot channels plus weighted mean squared error on the
 * tanh-distance channels, each term reduced as a masked mean with its own
 * voxel count. Analytic gradients come back with the report; voxels whose
 * mask is 0 contribute nothing and have exactly-zero gradients.
 *
 * Reduction and reproducibility: each term accumulates into a single
 * float64 in channel order (ascending class id), voxels in C order, then
 * divides by max(1, count); total = hot_term + lambda * dist_term in that
 * evaluation order. Reports are bit-stable across runs and thread counts.
 */

#ifndef HOTDIST_LOSS_HPP
#define HOTDIST_LOSS_HPP

#include <cstdint>
#include <vector>

#include "hotdist/targets.hpp"
#include "hotdist/volume.hpp"

namespace hotdist {

struct LossParams {
    /// Weight on the distance term; must be >= 0. The reduction is a fixed
    /// masked mean per term.
    double lambda_dist = 1.0;
};

struct PredictionBundle {
    std::vector<std::uint32_t> class_ids;
    std::vector<Volume<double>> hot_logits;  // unbounded reals
    std::vector<Volume<double>> dist_pred;   // expected in [-1,1], not enforced

    /// All-zero predictions shaped like a target bundle.
    static PredictionBundle zeros_like(const TargetBundle& targets);
};

struct LossReport {
    double total = 0.0;
    double hot_term = 0.0;
    double dist_term = 0.0;
    double lambda = 1.0;

    std::vector<std::uint32_t> class_ids;  // bundle channel order
    std::vector<i64> hot_count;            // per class
    std::vector<i64> dist_count;           // per class
    i64 hot_count_total = 0;
    i64 dist_count_total = 0;

    std::vector<Volume<double>> grad_hot_logits;
    std::vector<Volume<double>> grad_dist;
};

/// Numerically stable BCE: max(x,0) - x*t + log1p(exp(-|x|)). Finite for
/// every finite logit; derivative w.r.t. x is sigmoid(x) - t.
double bce_from_logits(double x, double t);

double sigmoid(double x);

LossReport hot_distance_loss(const PredictionBundle& pred, const TargetBundle& targets,
                             const LossParams& params);

/// Central-difference check of the report gradients at `trials` randomly
/// chosen masked coordinates. Returns the worst relative error
/// |analytic - numeric| / max(|analytic|, |numeric|), 0 when both vanish.
double check_gradients(const PredictionBundle& pred, const TargetBundle& targets,
                       const LossParams& params, double epsilon, int trials,
                       std::uint64_t seed = 0x9d1577ed41bd2a0cull);

struct FitResult {
    PredictionBundle pred;
    /// trace[0] is the initial loss, trace[k] the loss after k updates.
    std::vector<double> trace;
};

/// Fixed-step gradient descent on the prediction tensors. Each masked
/// coordinate steps against the per-coordinate gradient of the summed
/// objective (sigmoid(x)-t for logits, 2*lambda*(p-t) for distances);
/// coordinates whose mask is 0 are left bit-identical to init. Throws
/// DivergenceError when the traced loss becomes non-finite.
FitResult fit_predictions(const TargetBundle& targets, const LossParams& params, double step,
                          int iters, PredictionBundle init);

}  // namespace hotdist

#endif
