// SPDX-License-Identifier: Apache-2.0
#include "mae4d/harness/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "mae4d/harness/optim.hpp"
#include "mae4d/numcore/ops.hpp"
#include "mae4d/numcore/random.hpp"
#include "mae4d/simplemae/model.hpp"

namespace mae4d::harness {

namespace nc = numcore;
namespace sm = simplemae;

const char* to_string(Mode mode) {
  switch (mode) {
    case Mode::kPretrain: return "pretrain";
    case Mode::kFrozenEval: return "frozen_eval";
    case Mode::kFinetune: return "finetune";
    case Mode::kDistill: return "distill";
  }
  return "?";
}

Mode mode_from_string(const std::string& s) {
  for (auto m : {Mode::kPretrain, Mode::kFrozenEval, Mode::kFinetune, Mode::kDistill}) {
    if (s == to_string(m)) return m;
  }
  throw std::invalid_argument("unknown mode '" + s + "'");
}

std::size_t ProtocolConfig::finetune_steps() const {
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(finetune_length * steps())));
}

void ProtocolConfig::validate() const {
  if (budget == 0 || batch == 0) throw std::invalid_argument("protocol: budget and batch must be positive");
  if (budget < batch) throw std::invalid_argument("protocol: budget smaller than one batch");
  if (frozen_lrs.empty() || finetune_lrs.empty() || finetune_weight_decays.empty()) {
    throw std::invalid_argument("protocol: empty sweep grid");
  }
  if (!(finetune_length > 0.0) || !(backbone_lr_factor > 0.0)) {
    throw std::invalid_argument("protocol: finetune length and backbone lr factor must be positive");
  }
  if (frozen_warmup_fraction < 0.0 || frozen_warmup_fraction >= 1.0 || finetune_warmup_fraction < 0.0) {
    throw std::invalid_argument("protocol: warmup fraction out of range");
  }
  if (layer_percent != 0) sm::block_for_percent(layer_percent, 1);
}

int default_layer_percent(Task task) { return task == Task::kClass ? 75 : 95; }

std::size_t select_best(Task task, const std::vector<SweepRow>& rows) {
  if (rows.empty()) throw std::invalid_argument("select_best: empty sweep");
  std::size_t best = rows.size();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const SweepRow& r = rows[i];
    if (r.diverged) continue;
    if (best == rows.size()) {
      best = i;
      continue;
    }
    const SweepRow& b = rows[best];
    if (better(task, r.metric, b.metric) ||
        (r.metric == b.metric && (r.lr < b.lr || (r.lr == b.lr && r.weight_decay < b.weight_decay)))) {
      best = i;
    }
  }
  return best == rows.size() ? 0 : best;
}

namespace {

/// Features of clip `index` of the training (train=true) or validation split.
using FeatureFn = std::function<Var(const sm::Binder& backbone, bool train, std::size_t index)>;

struct Cell {
  double lr = 0.0;
  double weight_decay = 0.0;
  std::size_t steps = 0;
  std::size_t warmup = 0;
};

struct CellOutcome {
  SweepRow row;
  sm::ParamSet backbone;
};

CellOutcome run_cell(const TaskData& data, const readout::HeadConfig& head_cfg, const ProtocolConfig& cfg,
                     const Cell& cell, const sm::ParamSet& backbone_init, bool train_backbone,
                     const FeatureFn& features) {
  CellOutcome out;
  out.row.lr = cell.lr;
  out.row.weight_decay = cell.weight_decay;
  out.row.steps = cell.steps;
  sm::ParamSet head = readout::init_head(head_cfg, nc::mix_seed(cfg.seed, 0x4ead));
  if (train_backbone) out.backbone = backbone_init;
  const sm::ParamSet& backbone = train_backbone ? out.backbone : backbone_init;
  AdamWHyper hyper;
  hyper.weight_decay = cell.weight_decay;
  OptimState head_opt = init_adamw(head, hyper);
  OptimState backbone_opt = train_backbone ? init_adamw(out.backbone, hyper) : OptimState{};
  const Schedule schedule{cell.lr, cell.warmup, cell.steps, std::min(cfg.floor_lr, cell.lr)};

  nc::Rng rng(nc::mix_seed(cfg.seed, 0xba7c));
  std::vector<std::size_t> order;
  std::size_t cursor = 0;
  const std::size_t n_train = data.train.size();
  try {
    for (std::size_t step = 0; step < cell.steps; ++step) {
      const sm::Binder hb(head, true);
      const sm::Binder bb(backbone, train_backbone);
      Var total;
      for (std::size_t b = 0; b < cfg.batch; ++b) {
        if (cursor == order.size()) {
          order = rng.permutation(n_train);
          cursor = 0;
        }
        const std::size_t idx = order[cursor++];
        const Var loss = task_loss(data.task, head_outputs(hb, head_cfg, features(bb, true, idx), data.train.examples[idx]),
                                   data.train.examples[idx]);
        total = total.defined() ? nc::add(total, loss) : loss;
      }
      const Var batch_loss = nc::scale(total, 1.0 / cfg.batch);
      out.row.final_loss = batch_loss.value().item();
      if (!std::isfinite(out.row.final_loss)) throw NonFiniteGradient("non-finite readout loss");
      nc::backward(batch_loss);
      const double lr = schedule.lr(step);
      adamw_step(head, hb.grads(), head_opt, lr);
      if (train_backbone) adamw_step(out.backbone, bb.grads(), backbone_opt, lr * cfg.backbone_lr_factor);
    }
  } catch (const NonFiniteGradient&) {
    out.row.diverged = true;
    out.row.metric = std::numeric_limits<double>::quiet_NaN();
    out.row.backbone_hash = backbone.hash();
    return out;
  }

  const sm::Binder hb(head, false);
  const sm::Binder bb(backbone, false);
  std::vector<Array> outputs;
  outputs.reserve(data.val.size());
  for (std::size_t i = 0; i < data.val.size(); ++i) {
    outputs.push_back(head_outputs(hb, head_cfg, features(bb, false, i), data.val.examples[i]).value());
  }
  out.row.metric = evaluate_outputs(data.task, outputs, data.val.examples, data.height, data.width);
  out.row.backbone_hash = backbone.hash();
  return out;
}

readout::HeadConfig head_for(const sm::ModelConfig& model, const TaskData& data, const ProtocolConfig& cfg) {
  const sm::Extent3 grid = model.token_grid();
  return readout::make_head_config(data.task, grid.h * grid.w, model.width, {readout::kReadoutFrames, data.height, data.width},
                                   cfg.head);
}

std::size_t warmup_steps(double fraction, std::size_t base_steps, std::size_t steps) {
  return std::min(steps, static_cast<std::size_t>(std::llround(fraction * base_steps)));
}

void check_data(const TaskData& data, const sm::ModelConfig& model) {
  if (data.train.size() == 0 || data.val.size() == 0) throw std::invalid_argument("evaluation: empty task data");
  if (data.height != model.clip.h || data.width != model.clip.w) {
    throw std::invalid_argument("evaluation: task clips are " + std::to_string(data.height) + "x" +
                                std::to_string(data.width) + ", backbone expects " + std::to_string(model.clip.h) +
                                "x" + std::to_string(model.clip.w));
  }
}

}  // namespace

SweepResult frozen_eval(const sm::Checkpoint& backbone, const TaskData& data, const ProtocolConfig& cfg) {
  cfg.validate();
  check_data(data, backbone.config);
  SweepResult r;
  r.task = data.task;
  r.mode = Mode::kFrozenEval;
  r.layer_percent = cfg.layer_percent ? cfg.layer_percent : default_layer_percent(data.task);
  r.backbone_hash_before = backbone.params.hash();

  auto cache = [&](const TaskSplit& split) {
    std::vector<Var> f;
    f.reserve(split.size());
    for (const auto& frames : split.frames) {
      f.push_back(nc::constant(resample_time(sm::extract_features(backbone.params, backbone.config, frames, r.layer_percent)).data));
    }
    return f;
  };
  const std::vector<Var> train = cache(data.train), val = cache(data.val);
  const FeatureFn features = [&](const sm::Binder&, bool is_train, std::size_t i) { return is_train ? train[i] : val[i]; };

  const readout::HeadConfig head = head_for(backbone.config, data, cfg);
  const std::size_t steps = cfg.steps();
  for (double lr : cfg.frozen_lrs) {
    const Cell cell{lr, cfg.frozen_weight_decay, steps, warmup_steps(cfg.frozen_warmup_fraction, steps, steps)};
    r.rows.push_back(run_cell(data, head, cfg, cell, backbone.params, false, features).row);
  }
  r.best = select_best(r.task, r.rows);
  r.backbone_hash_after = backbone.params.hash();
  return r;
}

SweepResult finetune(const sm::Checkpoint& backbone, const TaskData& data, const ProtocolConfig& cfg) {
  cfg.validate();
  check_data(data, backbone.config);
  SweepResult r;
  r.task = data.task;
  r.mode = Mode::kFinetune;
  r.layer_percent = cfg.layer_percent ? cfg.layer_percent : default_layer_percent(data.task);
  r.backbone_hash_before = backbone.params.hash();

  const sm::ModelConfig& model = backbone.config;
  const sm::Extent3 grid = model.token_grid();
  const FeatureFn features = [&](const sm::Binder& bb, bool is_train, std::size_t i) {
    const Array& frames = is_train ? data.train.frames[i] : data.val.frames[i];
    const Var tokens = sm::feature_tokens(bb, model, frames, r.layer_percent);
    return resample_time(nc::reshape(tokens, {grid.t, grid.h * grid.w, model.width}));
  };

  const readout::HeadConfig head = head_for(model, data, cfg);
  const std::size_t steps = cfg.finetune_steps();
  const std::size_t warmup = warmup_steps(cfg.finetune_warmup_fraction, cfg.steps(), steps);
  for (double lr : cfg.finetune_lrs) {
    for (double wd : cfg.finetune_weight_decays) {
      r.rows.push_back(run_cell(data, head, cfg, Cell{lr, wd, steps, warmup}, backbone.params, true, features).row);
    }
  }
  r.best = select_best(r.task, r.rows);
  r.backbone_hash_after = r.rows[r.best].backbone_hash;
  return r;
}

std::vector<LayerSweepRow> layer_sweep(const sm::Checkpoint& backbone, const TaskData& data, const ProtocolConfig& cfg) {
  std::vector<LayerSweepRow> rows;
  for (int percent : sm::supported_layer_percents()) {
    ProtocolConfig c = cfg;
    c.layer_percent = percent;
    const SweepResult r = frozen_eval(backbone, data, c);
    rows.push_back({percent, sm::block_for_percent(percent, backbone.config.depth), r.rows[r.best].lr, r.best_metric()});
  }
  return rows;
}

metrics::CsvTable sweep_table(const SweepResult& r) {
  metrics::CsvTable t;
  t.header = {"task",  "mode",  "layer_percent", "lr",       "weight_decay",  "steps",
              "metric", "value", "final_loss",   "diverged", "backbone_hash", "selected"};
  const std::string metric = task_metric(r.task).name;
  for (std::size_t i = 0; i < r.rows.size(); ++i) {
    const SweepRow& row = r.rows[i];
    t.add_row({readout::to_string(r.task), to_string(r.mode), std::to_string(r.layer_percent),
               metrics::format_number(row.lr), metrics::format_number(row.weight_decay), std::to_string(row.steps),
               metric, metrics::format_number(row.metric), metrics::format_number(row.final_loss),
               row.diverged ? "1" : "0", metrics::format_hash(row.backbone_hash), i == r.best ? "1" : "0"});
  }
  return t;
}

metrics::CsvTable layer_sweep_table(Task task, const std::vector<LayerSweepRow>& rows) {
  metrics::CsvTable t;
  t.header = {"task", "layer_percent", "block", "lr", "metric", "value"};
  const std::string metric = task_metric(task).name;
  for (const auto& r : rows) {
    t.add_row({readout::to_string(task), std::to_string(r.layer_percent), std::to_string(r.block),
               metrics::format_number(r.lr), metric, metrics::format_number(r.metric)});
  }
  return t;
}

}  // namespace mae4d::harness
