// SPDX-License-Identifier: Apache-2.0
#include "mae4d/harness/pretrain.hpp"

#include <cmath>
#include <sstream>

#include "mae4d/numcore/ops.hpp"
#include "mae4d/numcore/random.hpp"
#include "mae4d/synthworld/augment.hpp"

namespace mae4d::harness {

namespace nc = numcore;
namespace sm = simplemae;

void PretrainConfig::validate() const {
  model.validate();
  if (steps == 0 || batch == 0) throw std::invalid_argument("pretrain: steps and batch must be positive");
  if (resize < 1.0) throw std::invalid_argument("pretrain: resize factor below 1");
  if (!(divergence_factor > 1.0)) throw std::invalid_argument("pretrain: divergence factor must exceed 1");
  Schedule{lr, warmup_steps, steps, floor_lr}.validate();
}

metrics::CsvTable loss_table(const std::vector<LossPoint>& curve) {
  metrics::CsvTable t;
  t.header = {"step", "loss", "lr"};
  for (const auto& p : curve) {
    t.add_row({std::to_string(p.step), metrics::format_number(p.loss), metrics::format_number(p.lr)});
  }
  return t;
}

namespace {

void write_outputs(const PretrainConfig& cfg, const PretrainResult& r) {
  if (!cfg.checkpoint.empty()) sm::save_checkpoint(cfg.checkpoint, r.checkpoint);
  if (!cfg.loss_csv.empty()) metrics::write_csv(cfg.loss_csv, loss_table(r.curve));
}

}  // namespace

PretrainResult pretrain(const PretrainConfig& cfg, const std::vector<Array>& clips, const sm::ParamSet* init) {
  cfg.validate();
  if (clips.empty()) throw std::invalid_argument("pretrain: no clips");
  const sm::Extent3& out = cfg.model.clip;
  for (const auto& c : clips) {
    if (c.rank() != 4 || c.dim(3) != 3 || c.dim(0) < out.t || c.dim(1) < out.h || c.dim(2) < out.w) {
      throw nc::ShapeError("pretrain: source clip " + nc::to_string(c.shape()) + " smaller than the model clip");
    }
  }

  PretrainResult r;
  r.checkpoint.config = cfg.model;
  r.checkpoint.params = init ? *init : sm::init_model(cfg.model, cfg.seed);
  sm::ParamSet& params = r.checkpoint.params;
  OptimState opt = init_adamw(params, cfg.optim);
  const Schedule schedule{cfg.lr, cfg.warmup_steps, cfg.steps, cfg.floor_lr};
  nc::Rng rng(nc::mix_seed(cfg.seed, 0x70e7));
  const std::size_t tokens = cfg.model.token_count();
  double initial = 0.0;

  for (std::size_t step = 0; step < cfg.steps; ++step) {
    const sm::Binder binder(params, true);
    Var total;
    for (std::size_t b = 0; b < cfg.batch; ++b) {
      const Array& src = clips[rng.index(clips.size())];
      const auto window = synthworld::pretrain_window(rng, src.dim(0), src.dim(1), src.dim(2), out.t, cfg.resize);
      const Array frames = synthworld::crop_frames(src, window, out.t, out.h, out.w);
      const sm::MaskPlan mask = sm::sample_mask(tokens, cfg.model.mask_ratio, rng.engine()());
      const Var loss = sm::mae_loss(sm::encode_and_decode(binder, cfg.model, frames, mask).reconstruction, frames);
      total = total.defined() ? nc::add(total, loss) : loss;
    }
    const Var batch_loss = nc::scale(total, 1.0 / cfg.batch);
    const double loss = batch_loss.value().item();
    if (step == 0) initial = loss;
    if (!std::isfinite(loss) || loss > cfg.divergence_factor * initial) {
      std::ostringstream msg;
      msg << "pretraining diverged at step " << step << ": loss " << loss << " vs initial " << initial
          << " (limit x" << cfg.divergence_factor << ", lr " << schedule.lr(step) << ")";
      throw TrainingDiverged(msg.str());
    }
    nc::backward(batch_loss);
    const double lr = schedule.lr(step);
    adamw_step(params, binder.grads(), opt, lr);
    r.curve.push_back({step, loss, lr});
    if (cfg.checkpoint_every && (step + 1) % cfg.checkpoint_every == 0 && step + 1 < cfg.steps) {
      r.checkpoint.extra = {{"kind", "pretrain"}, {"seed", cfg.seed}, {"step", step + 1}};
      write_outputs(cfg, r);
    }
  }
  r.checkpoint.extra = {{"kind", "pretrain"}, {"seed", cfg.seed}, {"step", cfg.steps}};
  write_outputs(cfg, r);
  return r;
}

ReconstructionError masked_reconstruction_error(const sm::ParamSet& params, const sm::ModelConfig& cfg,
                                                const std::vector<Array>& clips, std::uint64_t seed) {
  if (clips.empty()) throw std::invalid_argument("masked_reconstruction_error: no clips");
  Array mean_clip(clips.front().shape());
  for (const auto& c : clips) {
    if (!nc::same_shape(c, mean_clip)) throw nc::ShapeError("masked_reconstruction_error: clips differ in shape");
    for (std::size_t i = 0; i < c.size(); ++i) mean_clip[i] += c[i] / clips.size();
  }
  const Array mean_tokens = sm::patchify(mean_clip, cfg.input_patch);
  const sm::Binder frozen(params, false);
  nc::Rng rng(nc::mix_seed(seed, 0x3a5c));
  double model_sq = 0.0, mean_sq = 0.0;
  std::size_t count = 0;
  for (const auto& c : clips) {
    const sm::MaskPlan mask = sm::sample_mask(cfg.token_count(), cfg.mask_ratio, rng.engine()());
    const Array recon = sm::patchify(sm::encode_and_decode(frozen, cfg, c, mask).reconstruction.value(), cfg.input_patch);
    const Array truth = sm::patchify(c, cfg.input_patch);
    const std::size_t width = truth.dim(1);
    for (std::size_t tok : mask.masked) {
      for (std::size_t j = 0; j < width; ++j) {
        const double x = truth[tok * width + j];
        model_sq += (recon[tok * width + j] - x) * (recon[tok * width + j] - x);
        mean_sq += (mean_tokens[tok * width + j] - x) * (mean_tokens[tok * width + j] - x);
      }
      count += width;
    }
  }
  return {model_sq / count, mean_sq / count};
}

}  // namespace mae4d::harness
