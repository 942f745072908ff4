// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "mae4d/harness/distill.hpp"
#include "mae4d/harness/evaluation.hpp"
#include "mae4d/harness/pretrain.hpp"
#include "mae4d/simplemae/config.hpp"
#include "mae4d/synthworld/scene.hpp"

namespace mae4d::cli {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Environment variable naming the root that relative output paths resolve
/// against (default: the working directory).
inline constexpr const char* kOutputRootEnv = "MAE4D_OUTPUT_ROOT";

struct PathsSection {
  std::string output = ".";
  std::string checkpoint;
  std::string teacher;
  /// Directory of cached clips written by gen-data; empty generates clips.
  std::string data;
};

struct DataSection {
  /// Pretraining / distillation clips.
  std::size_t clips = 256;
  std::size_t train_clips = 256;
  std::size_t val_clips = 64;
  /// gen-data clip count and first stream index.
  std::size_t count = 4;
  std::size_t first_index = 0;
  synthworld::GenConfig generator;
};

struct PretrainSection {
  std::size_t steps = 500;
  std::size_t batch = 8;
  double lr = 1e-3;
  std::size_t warmup_steps = 25;
  double resize = 1.15;
  std::size_t checkpoint_every = 0;
};

struct ProtocolSection {
  std::string task = "depth";
  std::size_t budget = 32000;
  std::size_t batch = 32;
  int layer_percent = 0;
  double finetune_length = 0.5;
  std::vector<double> frozen_lrs{1e-4, 3e-4, 1e-3};
  std::vector<double> finetune_lrs{1e-4, 3e-4};
  std::vector<double> finetune_weight_decays{1e-4, 5e-2};
  std::size_t qkv_size = 64;
  std::size_t heads = 4;
  std::size_t query_mlp_size = 64;
};

struct DistillSection {
  std::size_t steps = 500;
  std::size_t batch = 8;
  double lr = 1e-3;
  std::size_t warmup_steps = 25;
  /// Empty: the default pair for the teacher's depth.
  std::vector<std::size_t> teacher_blocks;
};

struct DumpSection {
  std::vector<std::size_t> frames{0, 8};
  std::size_t clip_index = 0;
  std::uint64_t mask_seed = 0;
};

/// Everything a subcommand needs. The text form is JSON with one object
/// per section; see README for the grammar. Unknown keys are rejected.
struct RunConfig {
  std::string subcommand;
  std::optional<std::uint64_t> seed;
  std::string model = "nano";
  /// Merged over the named model's fields (e.g. {"mask_ratio": 0.9}).
  nlohmann::json model_overrides = nlohmann::json::object();
  PathsSection paths;
  DataSection data;
  PretrainSection pretrain;
  ProtocolSection protocol;
  DistillSection distill;
  DumpSection dump;

  /// The model configuration after overrides, validated.
  simplemae::ModelConfig model_config() const;
  /// Seed, or ConfigError naming the subcommand when absent.
  std::uint64_t required_seed() const;
  /// Canonical text (sorted keys, two-space indent, trailing newline).
  std::string canonical() const;
  std::uint64_t hash() const;
};

void to_json(nlohmann::json& j, const RunConfig& c);
void from_json(const nlohmann::json& j, RunConfig& c);

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::filesystem::path& path);

/// `p` unchanged when absolute, else under $MAE4D_OUTPUT_ROOT when set.
std::filesystem::path resolve_output(const std::filesystem::path& p);

harness::PretrainConfig pretrain_config(const RunConfig& c);
harness::ProtocolConfig protocol_config(const RunConfig& c);
harness::DistillConfig distill_config(const RunConfig& c, std::size_t teacher_depth);

}  // namespace mae4d::cli
