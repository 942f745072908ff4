// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <vector>

#include "mae4d/harness/optim.hpp"
#include "mae4d/metrics/csv.hpp"
#include "mae4d/simplemae/container.hpp"
#include "mae4d/simplemae/model.hpp"

namespace mae4d::harness {

struct PretrainConfig {
  simplemae::ModelConfig model = simplemae::named_config("nano");
  std::uint64_t seed = 0;
  std::size_t steps = 500;
  std::size_t batch = 8;
  double lr = 1e-3;
  std::size_t warmup_steps = 25;
  double floor_lr = 1e-7;
  AdamWHyper optim;
  /// Minimum resize factor before the random crop.
  double resize = 1.15;
  /// Abort when a step's loss exceeds this multiple of the first one.
  double divergence_factor = 10.0;
  /// Write the checkpoint every this many steps as well as at the end
  /// (0: end only). Nothing is written when `checkpoint` is empty.
  std::size_t checkpoint_every = 0;
  std::filesystem::path checkpoint;
  std::filesystem::path loss_csv;

  void validate() const;
};

struct LossPoint {
  std::size_t step = 0;
  double loss = 0.0;
  double lr = 0.0;
};

struct PretrainResult {
  simplemae::Checkpoint checkpoint;
  std::vector<LossPoint> curve;
};

class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// SimpleMAE pretraining on source clips [T, H, W, 3] (any size at least
/// the model clip). Each example is a random crop after resizing by
/// `resize`, a random start frame and a coin-flip mirror, then a fresh
/// random mask; the loss is the L2 reconstruction error and the batch mean
/// drives one AdamW step. Starts from `init` when given, else from
/// init_model(model, seed).
PretrainResult pretrain(const PretrainConfig& cfg, const std::vector<Array>& clips,
                        const simplemae::ParamSet* init = nullptr);

/// Loss curve as CSV with columns step, loss, lr.
metrics::CsvTable loss_table(const std::vector<LossPoint>& curve);

struct ReconstructionError {
  /// Mean squared error of the model on masked patches.
  double model = 0.0;
  /// Same, predicting every pixel by its mean over `clips`.
  double pixel_mean = 0.0;
};

/// Both errors over the masked patches of each clip (model resolution, no
/// crop), one mask per clip drawn from `seed`.
ReconstructionError masked_reconstruction_error(const simplemae::ParamSet& params, const simplemae::ModelConfig& cfg,
                                                const std::vector<Array>& clips, std::uint64_t seed);

}  // namespace mae4d::harness
