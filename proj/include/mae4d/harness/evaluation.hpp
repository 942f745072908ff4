// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mae4d/harness/tasks.hpp"
#include "mae4d/metrics/csv.hpp"
#include "mae4d/simplemae/container.hpp"

namespace mae4d::harness {

enum class Mode { kPretrain, kFrozenEval, kFinetune, kDistill };
const char* to_string(Mode mode);
/// Accepts "pretrain", "frozen_eval", "finetune", "distill".
Mode mode_from_string(const std::string& s);

/// Readout protocol. Each sweep cell trains for budget / batch steps
/// (finetuning scales that by `finetune_length`), with linear warmup over a
/// fixed fraction of the frozen step count and cosine decay to floor_lr.
struct ProtocolConfig {
  Mode mode = Mode::kFrozenEval;
  std::size_t budget = 32000;
  std::size_t batch = 32;
  std::vector<double> frozen_lrs{1e-4, 3e-4, 1e-3};
  double frozen_weight_decay = 1e-4;
  std::vector<double> finetune_lrs{1e-4, 3e-4};
  std::vector<double> finetune_weight_decays{1e-4, 5e-2};
  double backbone_lr_factor = 0.003;
  /// 0.5 short, 1 medium, 2 long.
  double finetune_length = 0.5;
  double frozen_warmup_fraction = 1.0 / 40.0;
  double finetune_warmup_fraction = 3.0 / 40.0;
  double floor_lr = 1e-7;
  /// Feature layer percentage; 0 picks the task default.
  int layer_percent = 0;
  readout::HeadSizes head;
  std::uint64_t seed = 0;

  std::size_t steps() const { return budget / batch; }
  std::size_t finetune_steps() const;
  /// Throws std::invalid_argument on a zero budget or batch, a budget
  /// smaller than one batch, an empty grid or an unsupported layer.
  void validate() const;
};

/// 95, or 75 for classification.
int default_layer_percent(Task task);

struct SweepRow {
  double lr = 0.0;
  double weight_decay = 0.0;
  std::size_t steps = 0;
  double metric = 0.0;
  double final_loss = 0.0;
  bool diverged = false;
  std::uint64_t backbone_hash = 0;
};

struct SweepResult {
  Task task = Task::kDepth;
  Mode mode = Mode::kFrozenEval;
  int layer_percent = 95;
  std::vector<SweepRow> rows;
  std::size_t best = 0;
  std::uint64_t backbone_hash_before = 0;
  /// Frozen: the backbone after every cell ran. Finetune: the selected
  /// cell's trained backbone.
  std::uint64_t backbone_hash_after = 0;

  double best_metric() const { return rows.at(best).metric; }
};

/// Best cell: the better metric wins, ties go to the lowest learning rate
/// (then the lowest weight decay). Diverged cells are never selected unless
/// every cell diverged.
std::size_t select_best(Task task, const std::vector<SweepRow>& rows);

/// Readout on frozen features, one cell per learning rate.
SweepResult frozen_eval(const simplemae::Checkpoint& backbone, const TaskData& data, const ProtocolConfig& cfg);

/// Everything trainable, backbone at lr * backbone_lr_factor; one cell per
/// (lr, weight decay) pair.
SweepResult finetune(const simplemae::Checkpoint& backbone, const TaskData& data, const ProtocolConfig& cfg);

struct LayerSweepRow {
  int layer_percent = 0;
  std::size_t block = 0;
  double lr = 0.0;
  double metric = 0.0;
};

/// frozen_eval at each supported layer percentage.
std::vector<LayerSweepRow> layer_sweep(const simplemae::Checkpoint& backbone, const TaskData& data,
                                       const ProtocolConfig& cfg);

/// Columns: task, mode, layer_percent, lr, weight_decay, steps, metric,
/// value, final_loss, diverged, backbone_hash, selected.
metrics::CsvTable sweep_table(const SweepResult& r);
/// Columns: task, layer_percent, block, lr, metric, value.
metrics::CsvTable layer_sweep_table(Task task, const std::vector<LayerSweepRow>& rows);

}  // namespace mae4d::harness
