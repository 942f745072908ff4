// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "mae4d/harness/optim.hpp"
#include "mae4d/harness/pretrain.hpp"
#include "mae4d/simplemae/container.hpp"

namespace mae4d::harness {

/// Feature distillation: the student sees the full unmasked clip and two
/// parallel linear adapters on its last block predict the teacher's token
/// activations at two blocks, under an L1 loss. The adapters only exist
/// during training.
struct DistillConfig {
  simplemae::ModelConfig student = simplemae::named_config("nano");
  /// 1-based teacher blocks matched by adapter 0 and adapter 1.
  std::array<std::size_t, 2> teacher_blocks{4, 5};
  std::uint64_t seed = 0;
  std::size_t steps = 500;
  std::size_t batch = 8;
  double lr = 1e-3;
  std::size_t warmup_steps = 25;
  double floor_lr = 1e-7;
  AdamWHyper optim;
  std::filesystem::path checkpoint;
  std::filesystem::path loss_csv;

  void validate() const;
};

/// Teacher blocks at the same relative depths as layers 36 and 51 of a
/// 56-block teacher, rounded to the nearest block.
std::array<std::size_t, 2> default_teacher_blocks(std::size_t teacher_depth);

/// "distill_adapter.0" and "distill_adapter.1".
inline constexpr const char* kAdapterPrefix = "distill_adapter.";

struct DistillResult {
  /// Student parameters without adapters.
  simplemae::Checkpoint student;
  std::vector<LossPoint> curve;
};

/// Throws std::out_of_range for a teacher block outside [1, depth] and
/// std::invalid_argument when the teacher is not both deeper and wider than
/// the student, or the two token grids differ.
DistillResult distill(const simplemae::Checkpoint& teacher, const DistillConfig& cfg, const std::vector<Array>& clips);

}  // namespace mae4d::harness
