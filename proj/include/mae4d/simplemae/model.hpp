// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "mae4d/simplemae/config.hpp"
#include "mae4d/simplemae/masking.hpp"
#include "mae4d/simplemae/params.hpp"
#include "mae4d/simplemae/video.hpp"

namespace mae4d::simplemae {

/// Parameter tensors of the model, in declaration order.
///
/// Encoder: patch embedding, one learned positional embedding per token
/// position, `depth` pre-norm blocks. Decoding: the learned latent grid with
/// its own positional embedding, a final layer norm and one linear layer
/// mapping each latent token to an output patch.
std::vector<ParamSpec> param_specs(const ModelConfig& cfg);

struct ParamCount {
  std::size_t encoder = 0;
  std::size_t total = 0;
};
/// Counts parameters from shapes alone; nothing is allocated.
ParamCount count_parameters(const ModelConfig& cfg);

ParamSet init_model(const ModelConfig& cfg, std::uint64_t seed);

/// Output of the transformer trunk for one clip.
struct TrunkOutput {
  /// Output of each executed block, block 1 first. Rows are the visible
  /// tokens followed (in the last `latent_layers` blocks) by the latents.
  std::vector<Var> blocks;
  std::size_t visible = 0;
};

/// Runs the trunk on pre-extracted patch values.
///
/// `patches` is [k, t*h*w*3] and `positions[i]` is the grid index of row i.
/// With `with_latents`, the latent grid joins before block
/// depth - latent_layers + 1. Execution stops after `last_block` (1-based;
/// 0 means all blocks).
TrunkOutput run_trunk(const Binder& p, const ModelConfig& cfg, const Var& patches,
                      const std::vector<std::size_t>& positions, bool with_latents, std::size_t last_block = 0);

struct MaeOutput {
  /// [T, H, W, 3], assembled from every latent token.
  Var reconstruction;
  TrunkOutput trunk;
};

/// SimpleMAE forward pass: only `mask.kept` tokens enter the encoder; the
/// latent grid is decoded linearly patch by patch over the whole clip.
MaeOutput encode_and_decode(const Binder& p, const ModelConfig& cfg, const Array& frames, const MaskPlan& mask);

/// Mean squared error over every pixel of every patch.
Var mae_loss(const Var& reconstruction, const Array& frames);

/// Readout layer percentages supported for feature extraction.
const std::vector<int>& supported_layer_percents();

/// 1-based block index read at `percent` of `depth` (floor).
std::size_t block_for_percent(int percent, std::size_t depth);

/// Token activations of block `block_for_percent(percent)` on the unmasked
/// clip as [N, C]; latent tokens are dropped. Differentiable through `p`.
Var feature_tokens(const Binder& p, const ModelConfig& cfg, const Array& frames, int percent);

/// Feature map T' x K x C of the unmasked clip (T' = T / patch.t).
FeatureMap extract_features(const ParamSet& params, const ModelConfig& cfg, const Array& frames, int percent);

}  // namespace mae4d::simplemae
