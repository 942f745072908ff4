// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

namespace mae4d::simplemae {

/// Extent of a space-time block: frames x rows x columns.
struct Extent3 {
  std::size_t t = 1;
  std::size_t h = 1;
  std::size_t w = 1;

  std::size_t volume() const { return t * h * w; }
  bool operator==(const Extent3&) const = default;
};

/// Space-time ViT trained with SimpleMAE.
///
/// `latent_layers` is the number of final blocks in which the learned latent
/// grid co-attends with the visible tokens. `decode_grid` x `output_patch`
/// must tile `clip` exactly.
struct ModelConfig {
  std::string name = "custom";
  std::size_t width = 64;
  std::size_t depth = 4;
  std::size_t mlp = 256;
  std::size_t heads = 4;
  Extent3 input_patch{2, 16, 16};
  std::size_t latent_layers = 4;
  Extent3 decode_grid{8, 14, 14};
  Extent3 output_patch{2, 16, 16};
  double mask_ratio = 0.95;
  Extent3 clip{16, 224, 224};

  /// Number of encoder tokens for a full clip.
  std::size_t token_count() const;
  Extent3 token_grid() const;
  std::size_t patch_values() const { return input_patch.volume() * 3; }
  std::size_t latent_count() const { return decode_grid.volume(); }

  /// Throws std::invalid_argument describing the first violated invariant.
  void validate() const;

  bool operator==(const ModelConfig&) const = default;
};

/// Named configurations: the seven large ones ("S", "B", "L", "H", "G",
/// "e", "j") for parameter accounting, and the trainable desk-scale "nano"
/// and "micro" models (16x32x32 clips, 2x8x8 patches).
ModelConfig named_config(const std::string& name);
std::vector<std::string> config_names();

void to_json(nlohmann::json& j, const Extent3& e);
void from_json(const nlohmann::json& j, Extent3& e);
void to_json(nlohmann::json& j, const ModelConfig& c);
void from_json(const nlohmann::json& j, ModelConfig& c);

}  // namespace mae4d::simplemae
