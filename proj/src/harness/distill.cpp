// SPDX-License-Identifier: Apache-2.0
#include "mae4d/harness/distill.hpp"

#include <cmath>
#include <string>

#include "mae4d/numcore/ops.hpp"
#include "mae4d/numcore/random.hpp"
#include "mae4d/simplemae/layers.hpp"

namespace mae4d::harness {

namespace nc = numcore;
namespace sm = simplemae;

void DistillConfig::validate() const {
  student.validate();
  if (steps == 0 || batch == 0) throw std::invalid_argument("distill: steps and batch must be positive");
  Schedule{lr, warmup_steps, steps, floor_lr}.validate();
}

std::array<std::size_t, 2> default_teacher_blocks(std::size_t depth) {
  auto at = [depth](double f) { return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(f * depth))); };
  return {at(36.0 / 56.0), at(51.0 / 56.0)};
}

namespace {

std::string adapter(std::size_t i) { return kAdapterPrefix + std::to_string(i); }

/// Token rows (latents dropped) of `last_block` on the unmasked clip.
Var tokens_at(const sm::Binder& p, const sm::ModelConfig& cfg, const Array& frames, std::size_t last_block) {
  const std::size_t n = cfg.token_count();
  const sm::MaskPlan all = sm::MaskPlan::all_visible(n);
  const Var patches = nc::constant(sm::patchify(frames, cfg.input_patch));
  const Var out = sm::run_trunk(p, cfg, patches, all.kept, true, last_block).blocks.back();
  return out.shape()[0] == n ? out : nc::slice(out, 0, 0, n);
}

}  // namespace

DistillResult distill(const sm::Checkpoint& teacher, const DistillConfig& cfg, const std::vector<Array>& clips) {
  cfg.validate();
  const sm::ModelConfig& tc = teacher.config;
  const sm::ModelConfig& sc = cfg.student;
  for (std::size_t b : cfg.teacher_blocks) {
    if (b < 1 || b > tc.depth) {
      throw std::out_of_range("distill: teacher block " + std::to_string(b) + " outside [1, " +
                              std::to_string(tc.depth) + "]");
    }
  }
  if (tc.depth < sc.depth || tc.width < sc.width || (tc.depth == sc.depth && tc.width == sc.width)) {
    throw std::invalid_argument("distill: teacher '" + tc.name + "' must be deeper and wider than student '" + sc.name + "'");
  }
  if (!(tc.clip == sc.clip) || !(tc.input_patch == sc.input_patch)) {
    throw std::invalid_argument("distill: teacher and student token grids differ");
  }
  if (clips.empty()) throw std::invalid_argument("distill: no clips");

  // Teacher targets are fixed, so they are computed once per clip.
  const sm::Binder frozen(teacher.params, false);
  std::vector<std::array<Var, 2>> targets;
  targets.reserve(clips.size());
  for (const auto& c : clips) {
    targets.push_back({nc::constant(tokens_at(frozen, tc, c, cfg.teacher_blocks[0]).value()),
                       nc::constant(tokens_at(frozen, tc, c, cfg.teacher_blocks[1]).value())});
  }

  sm::ParamSet params = sm::init_model(sc, cfg.seed);
  std::vector<sm::ParamSpec> specs;
  for (std::size_t i = 0; i < 2; ++i) sm::append_linear_specs(specs, adapter(i), sc.width, tc.width);
  for (auto& [name, value] : sm::init_params(specs, nc::mix_seed(cfg.seed, 0xada9))) params.set(name, value);

  OptimState opt = init_adamw(params, cfg.optim);
  const Schedule schedule{cfg.lr, cfg.warmup_steps, cfg.steps, cfg.floor_lr};
  nc::Rng rng(nc::mix_seed(cfg.seed, 0xd157));
  DistillResult r;
  for (std::size_t step = 0; step < cfg.steps; ++step) {
    const sm::Binder p(params, true);
    Var total;
    for (std::size_t b = 0; b < cfg.batch; ++b) {
      const std::size_t idx = rng.index(clips.size());
      const Var s = tokens_at(p, sc, clips[idx], sc.depth);
      for (std::size_t i = 0; i < 2; ++i) {
        const Var pred = nc::linear(s, p(adapter(i) + ".w"), p(adapter(i) + ".b"));
        const Var l1 = nc::mean(nc::abs(nc::sub(pred, targets[idx][i])));
        total = total.defined() ? nc::add(total, l1) : l1;
      }
    }
    const Var loss = nc::scale(total, 0.5 / cfg.batch);
    nc::backward(loss);
    const double lr = schedule.lr(step);
    adamw_step(params, p.grads(), opt, lr);
    r.curve.push_back({step, loss.value().item(), lr});
  }

  for (std::size_t i = 0; i < 2; ++i) {
    params.erase(adapter(i) + ".w");
    params.erase(adapter(i) + ".b");
  }
  r.student.config = sc;
  r.student.params = std::move(params);
  r.student.extra = {{"kind", "distill"},
                     {"seed", cfg.seed},
                     {"step", cfg.steps},
                     {"teacher", tc.name},
                     {"teacher_blocks", cfg.teacher_blocks}};
  if (!cfg.checkpoint.empty()) sm::save_checkpoint(cfg.checkpoint, r.student);
  if (!cfg.loss_csv.empty()) metrics::write_csv(cfg.loss_csv, loss_table(r.curve));
  return r;
}

}  // namespace mae4d::harness
