/* Manifest formats for multi-channel bundles and loss reports.
 *
 * Target bundle manifest:
 *   {"class_ids":[...],
 *    "channels":{"hot":[paths],"hot_mask":[...],"dist":[...],"dist_mask":[...]},
 *    "scale":s}
 * Prediction bundle manifest:
 *   {"class_ids":[...],"channels":{"hot_logits":[paths],"dist_pred":[...]}}
 *
 * Channel paths are volume headers relative to the manifest's directory,
 * one per class in channel order (ascending class id).
 *
 * Loss report JSON:
 *   {"total":..,"hot_term":..,"dist_term":..,"lambda":..,
 *    "counts":{"hot":{"<id>":n,...},"dist":{...},"hot_total":N,"dist_total":M}}
 */

#ifndef HOTDIST_BUNDLE_IO_HPP
#define HOTDIST_BUNDLE_IO_HPP

#include <filesystem>

#include "hotdist/loss.hpp"
#include "hotdist/targets.hpp"

namespace hotdist {

void write_target_bundle(const TargetBundle& bundle, const std::filesystem::path& manifest_path);
TargetBundle read_target_bundle(const std::filesystem::path& manifest_path);

void write_prediction_bundle(const PredictionBundle& pred,
                             const std::filesystem::path& manifest_path);
PredictionBundle read_prediction_bundle(const std::filesystem::path& manifest_path);

/// Gradients are not serialized; write them via write_volume when needed.
void write_loss_report(const LossReport& report, const std::filesystem::path& path);

}  // namespace hotdist

#endif
