// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <ostream>
#include <vector>

#include "mae4d/cli/run_config.hpp"
#include "mae4d/numcore/array.hpp"

namespace mae4d::cli {

/// Entry point of the mae4d tool. Returns the process exit code: 0 on
/// success, 2 on a usage error, 1 on any other failure. Failures print one
/// line `mae4d: error: <kind>: <message>` to `err`.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Metric value for two CSV files; `task` is one of iou, epe, absrel, aj,
/// top1. Schemas:
///   iou     xmin, xmax, ymin, ymax per row (rows with frame == 0 skipped
///           when a frame column exists)
///   epe     p0..p11, the row-major [R | t] pose per row
///   absrel  depth per row
///   aj      track, frame, x, y, visible per row
///   top1    pred: one logit column per class; gt: label
double csv_metric(const std::string& task, const std::filesystem::path& pred, const std::filesystem::path& gt);

struct DumpFiles {
  std::vector<std::filesystem::path> original;
  std::vector<std::filesystem::path> masked;
  std::vector<std::filesystem::path> recon;
};

/// Writes frame_<t>_{original,masked,recon}.ppm for each requested frame of
/// `clip` ([T, H, W, 3] at the model's clip size). Masked patches are
/// zeroed in the masked image; the mask comes from `mask_seed`.
DumpFiles dump_reconstructions(const simplemae::Checkpoint& ckpt, const numcore::Array& clip,
                               const std::vector<std::size_t>& frames, std::uint64_t mask_seed,
                               const std::filesystem::path& out_dir);

}  // namespace mae4d::cli
