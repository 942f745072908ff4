// SPDX-License-Identifier: Apache-2.0
#include "mae4d/simplemae/model.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "mae4d/numcore/ops.hpp"
#include "mae4d/simplemae/layers.hpp"

namespace mae4d::simplemae {

namespace nc = numcore;

namespace {

std::string block_prefix(std::size_t i) { return "blocks." + std::to_string(i); }

void check_frames(const ModelConfig& cfg, const Array& frames) {
  const auto& s = frames.shape();
  if (s.size() != 4 || s[0] != cfg.clip.t || s[1] != cfg.clip.h || s[2] != cfg.clip.w || s[3] != 3) {
    throw nc::ShapeError("model '" + cfg.name + "': clip shape " + nc::to_string(s) + " does not match config " +
                         std::to_string(cfg.clip.t) + "x" + std::to_string(cfg.clip.h) + "x" +
                         std::to_string(cfg.clip.w) + "x3");
  }
}

}  // namespace

std::vector<ParamSpec> param_specs(const ModelConfig& cfg) {
  cfg.validate();
  std::vector<ParamSpec> specs;
  const std::size_t C = cfg.width;
  append_linear_specs(specs, "patch_embed", cfg.patch_values(), C);
  specs.push_back({"pos_embed", {cfg.token_count(), C}, Init::kTruncatedNormal});
  for (std::size_t i = 0; i < cfg.depth; ++i) append_block_specs(specs, block_prefix(i), C, cfg.mlp);
  specs.push_back({"latent_tokens", {cfg.latent_count(), C}, Init::kTruncatedNormal});
  specs.push_back({"latent_pos_embed", {cfg.latent_count(), C}, Init::kTruncatedNormal});
  append_layer_norm_specs(specs, "final_ln", C);
  append_linear_specs(specs, "decoder", C, cfg.output_patch.volume() * 3);
  return specs;
}

ParamCount count_parameters(const ModelConfig& cfg) {
  ParamCount c;
  for (const auto& s : param_specs(cfg)) {
    const std::size_t n = nc::numel(s.shape);
    c.total += n;
    const bool decoding = s.name.rfind("latent_", 0) == 0 || s.name.rfind("final_ln", 0) == 0 ||
                          s.name.rfind("decoder", 0) == 0;
    if (!decoding) c.encoder += n;
  }
  return c;
}

ParamSet init_model(const ModelConfig& cfg, std::uint64_t seed) { return init_params(param_specs(cfg), seed); }

TrunkOutput run_trunk(const Binder& p, const ModelConfig& cfg, const Var& patches,
                      const std::vector<std::size_t>& positions, bool with_latents, std::size_t last_block) {
  if (patches.shape().size() != 2 || patches.shape()[1] != cfg.patch_values() ||
      patches.shape()[0] != positions.size()) {
    throw nc::ShapeError("run_trunk: patches " + nc::to_string(patches.shape()) + " with " +
                         std::to_string(positions.size()) + " positions");
  }
  if (last_block == 0 || last_block > cfg.depth) last_block = cfg.depth;
  TrunkOutput out;
  out.visible = positions.size();
  Var x = nc::add(nc::linear(patches, p("patch_embed.w"), p("patch_embed.b")), nc::gather(p("pos_embed"), positions));
  const std::size_t join = cfg.depth - cfg.latent_layers;
  for (std::size_t i = 0; i < last_block; ++i) {
    if (with_latents && i == join) x = nc::concat({x, nc::add(p("latent_tokens"), p("latent_pos_embed"))}, 0);
    x = transformer_block(p, block_prefix(i), x, cfg.heads);
    out.blocks.push_back(x);
  }
  return out;
}

MaeOutput encode_and_decode(const Binder& p, const ModelConfig& cfg, const Array& frames, const MaskPlan& mask) {
  check_frames(cfg, frames);
  if (mask.total != cfg.token_count()) {
    throw std::invalid_argument("encode_and_decode: mask covers " + std::to_string(mask.total) + " tokens, clip has " +
                                std::to_string(cfg.token_count()));
  }
  const Array tokens = patchify(frames, cfg.input_patch);
  const Var visible = nc::gather(nc::constant(tokens), mask.kept);
  MaeOutput out;
  out.trunk = run_trunk(p, cfg, visible, mask.kept, true);
  const Var latents = nc::slice(out.trunk.blocks.back(), 0, out.trunk.visible, cfg.latent_count());
  const Var decoded = nc::linear(layer_norm_affine(p, "final_ln", latents), p("decoder.w"), p("decoder.b"));
  out.reconstruction = unpatchify(decoded, cfg.decode_grid, cfg.output_patch);
  return out;
}

Var mae_loss(const Var& reconstruction, const Array& frames) {
  if (reconstruction.shape() != frames.shape()) {
    throw nc::ShapeError("mae_loss: reconstruction " + nc::to_string(reconstruction.shape()) + " vs clip " +
                         nc::to_string(frames.shape()));
  }
  return nc::mean(nc::square(nc::sub(reconstruction, nc::constant(frames))));
}

const std::vector<int>& supported_layer_percents() {
  static const std::vector<int> kPercents{25, 50, 75, 85, 95, 100};
  return kPercents;
}

std::size_t block_for_percent(int percent, std::size_t depth) {
  const auto& ok = supported_layer_percents();
  if (std::find(ok.begin(), ok.end(), percent) == ok.end()) {
    throw std::invalid_argument("unsupported readout layer fraction " + std::to_string(percent) + "%");
  }
  return std::max<std::size_t>(1, static_cast<std::size_t>(percent) * depth / 100);
}

Var feature_tokens(const Binder& p, const ModelConfig& cfg, const Array& frames, int percent) {
  check_frames(cfg, frames);
  const std::size_t block = block_for_percent(percent, cfg.depth);
  const std::size_t n = cfg.token_count();
  const MaskPlan all = MaskPlan::all_visible(n);
  const TrunkOutput trunk = run_trunk(p, cfg, nc::constant(patchify(frames, cfg.input_patch)), all.kept, true, block);
  const Var& last = trunk.blocks.back();
  return last.shape()[0] == n ? last : nc::slice(last, 0, 0, n);
}

FeatureMap extract_features(const ParamSet& params, const ModelConfig& cfg, const Array& frames, int percent) {
  const Binder frozen(params, false);
  const Var tokens = feature_tokens(frozen, cfg, frames, percent);
  const Extent3 grid = cfg.token_grid();
  FeatureMap f;
  f.data = tokens.value().reshaped({grid.t, grid.h * grid.w, cfg.width});
  f.layer_percent = percent;
  return f;
}

}  // namespace mae4d::simplemae
