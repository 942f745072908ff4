// SPDX-License-Identifier: Apache-2.0
#include "mae4d/cli/run_config.hpp"

#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

namespace mae4d::cli {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : j.items()) {
    if (!allowed.count(key)) throw ConfigError(where + ": unknown key '" + key + "'");
  }
}

template <typename T>
void read(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

void to_json(json& j, const RunConfig& c) {
  j = json::object();
  j["subcommand"] = c.subcommand;
  j["seed"] = c.seed ? json(*c.seed) : json(nullptr);
  j["model"] = {{"name", c.model}, {"overrides", c.model_overrides}};
  j["paths"] = {{"output", c.paths.output},
                {"checkpoint", c.paths.checkpoint},
                {"teacher", c.paths.teacher},
                {"data", c.paths.data}};
  j["data"] = {{"clips", c.data.clips},         {"train_clips", c.data.train_clips},
               {"val_clips", c.data.val_clips}, {"count", c.data.count},
               {"first_index", c.data.first_index}, {"generator", c.data.generator}};
  j["pretrain"] = {{"steps", c.pretrain.steps},   {"batch", c.pretrain.batch},
                   {"lr", c.pretrain.lr},         {"warmup_steps", c.pretrain.warmup_steps},
                   {"resize", c.pretrain.resize}, {"checkpoint_every", c.pretrain.checkpoint_every}};
  const auto& p = c.protocol;
  j["protocol"] = {{"task", p.task},
                   {"budget", p.budget},
                   {"batch", p.batch},
                   {"layer_percent", p.layer_percent},
                   {"finetune_length", p.finetune_length},
                   {"frozen_lrs", p.frozen_lrs},
                   {"finetune_lrs", p.finetune_lrs},
                   {"finetune_weight_decays", p.finetune_weight_decays},
                   {"qkv_size", p.qkv_size},
                   {"heads", p.heads},
                   {"query_mlp_size", p.query_mlp_size}};
  j["distill"] = {{"steps", c.distill.steps},
                  {"batch", c.distill.batch},
                  {"lr", c.distill.lr},
                  {"warmup_steps", c.distill.warmup_steps},
                  {"teacher_blocks", c.distill.teacher_blocks}};
  j["dump"] = {{"frames", c.dump.frames}, {"clip_index", c.dump.clip_index}, {"mask_seed", c.dump.mask_seed}};
}

void from_json(const json& j, RunConfig& c) {
  check_keys(j, {"subcommand", "seed", "model", "paths", "data", "pretrain", "protocol", "distill", "dump"}, "config");
  c = RunConfig{};
  read(j, "subcommand", c.subcommand);
  if (j.contains("seed") && !j.at("seed").is_null()) c.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("model")) {
    const json& m = j.at("model");
    if (m.is_string()) {
      c.model = m.get<std::string>();
    } else {
      check_keys(m, {"name", "overrides"}, "model");
      read(m, "name", c.model);
      if (m.contains("overrides")) {
        c.model_overrides = m.at("overrides");
        if (!c.model_overrides.is_object()) throw ConfigError("model.overrides: expected an object");
      }
    }
  }
  if (j.contains("paths")) {
    const json& s = j.at("paths");
    check_keys(s, {"output", "checkpoint", "teacher", "data"}, "paths");
    read(s, "output", c.paths.output);
    read(s, "checkpoint", c.paths.checkpoint);
    read(s, "teacher", c.paths.teacher);
    read(s, "data", c.paths.data);
  }
  if (j.contains("data")) {
    const json& s = j.at("data");
    check_keys(s, {"clips", "train_clips", "val_clips", "count", "first_index", "generator"}, "data");
    read(s, "clips", c.data.clips);
    read(s, "train_clips", c.data.train_clips);
    read(s, "val_clips", c.data.val_clips);
    read(s, "count", c.data.count);
    read(s, "first_index", c.data.first_index);
    if (s.contains("generator")) {
      check_keys(s.at("generator"),
                 {"frames", "height", "width", "tracks", "min_sprites", "max_sprites", "min_blocks", "max_blocks",
                  "min_box_fraction", "max_retries"},
                 "data.generator");
      c.data.generator = s.at("generator").get<synthworld::GenConfig>();
    }
  }
  if (j.contains("pretrain")) {
    const json& s = j.at("pretrain");
    check_keys(s, {"steps", "batch", "lr", "warmup_steps", "resize", "checkpoint_every"}, "pretrain");
    read(s, "steps", c.pretrain.steps);
    read(s, "batch", c.pretrain.batch);
    read(s, "lr", c.pretrain.lr);
    read(s, "warmup_steps", c.pretrain.warmup_steps);
    read(s, "resize", c.pretrain.resize);
    read(s, "checkpoint_every", c.pretrain.checkpoint_every);
  }
  if (j.contains("protocol")) {
    const json& s = j.at("protocol");
    check_keys(s,
               {"task", "budget", "batch", "layer_percent", "finetune_length", "frozen_lrs", "finetune_lrs",
                "finetune_weight_decays", "qkv_size", "heads", "query_mlp_size"},
               "protocol");
    auto& p = c.protocol;
    read(s, "task", p.task);
    read(s, "budget", p.budget);
    read(s, "batch", p.batch);
    read(s, "layer_percent", p.layer_percent);
    read(s, "finetune_length", p.finetune_length);
    read(s, "frozen_lrs", p.frozen_lrs);
    read(s, "finetune_lrs", p.finetune_lrs);
    read(s, "finetune_weight_decays", p.finetune_weight_decays);
    read(s, "qkv_size", p.qkv_size);
    read(s, "heads", p.heads);
    read(s, "query_mlp_size", p.query_mlp_size);
  }
  if (j.contains("distill")) {
    const json& s = j.at("distill");
    check_keys(s, {"steps", "batch", "lr", "warmup_steps", "teacher_blocks"}, "distill");
    read(s, "steps", c.distill.steps);
    read(s, "batch", c.distill.batch);
    read(s, "lr", c.distill.lr);
    read(s, "warmup_steps", c.distill.warmup_steps);
    read(s, "teacher_blocks", c.distill.teacher_blocks);
  }
  if (j.contains("dump")) {
    const json& s = j.at("dump");
    check_keys(s, {"frames", "clip_index", "mask_seed"}, "dump");
    read(s, "frames", c.dump.frames);
    read(s, "clip_index", c.dump.clip_index);
    read(s, "mask_seed", c.dump.mask_seed);
  }
}

simplemae::ModelConfig RunConfig::model_config() const {
  simplemae::ModelConfig cfg;
  try {
    cfg = simplemae::named_config(model);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (!model_overrides.empty()) {
    json j = cfg;
    for (const auto& [key, value] : model_overrides.items()) {
      if (!j.contains(key)) throw ConfigError("model.overrides: unknown model field '" + key + "'");
      j[key] = value;
    }
    cfg = j.get<simplemae::ModelConfig>();
  }
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  return cfg;
}

std::uint64_t RunConfig::required_seed() const {
  if (!seed) throw ConfigError(subcommand + ": a seed is required (--seed or \"seed\" in the config)");
  return *seed;
}

std::string RunConfig::canonical() const { return json(*this).dump(2) + "\n"; }

std::uint64_t RunConfig::hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : canonical()) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

RunConfig parse_config(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  try {
    return j.get<RunConfig>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::filesystem::path resolve_output(const std::filesystem::path& p) {
  if (p.is_absolute()) return p;
  const char* root = std::getenv(kOutputRootEnv);
  if (root && *root) return std::filesystem::path(root) / p;
  return p;
}

harness::PretrainConfig pretrain_config(const RunConfig& c) {
  harness::PretrainConfig p;
  p.model = c.model_config();
  p.seed = c.required_seed();
  p.steps = c.pretrain.steps;
  p.batch = c.pretrain.batch;
  p.lr = c.pretrain.lr;
  p.warmup_steps = c.pretrain.warmup_steps;
  p.resize = c.pretrain.resize;
  p.checkpoint_every = c.pretrain.checkpoint_every;
  return p;
}

harness::ProtocolConfig protocol_config(const RunConfig& c) {
  harness::ProtocolConfig p;
  const auto& s = c.protocol;
  p.seed = c.required_seed();
  p.budget = s.budget;
  p.batch = s.batch;
  p.layer_percent = s.layer_percent;
  p.finetune_length = s.finetune_length;
  p.frozen_lrs = s.frozen_lrs;
  p.finetune_lrs = s.finetune_lrs;
  p.finetune_weight_decays = s.finetune_weight_decays;
  p.head.qkv_size = s.qkv_size;
  p.head.heads = s.heads;
  p.head.query_mlp_size = s.query_mlp_size;
  p.validate();
  return p;
}

harness::DistillConfig distill_config(const RunConfig& c, std::size_t teacher_depth) {
  harness::DistillConfig d;
  d.student = c.model_config();
  d.seed = c.required_seed();
  d.steps = c.distill.steps;
  d.batch = c.distill.batch;
  d.lr = c.distill.lr;
  d.warmup_steps = c.distill.warmup_steps;
  if (c.distill.teacher_blocks.empty()) {
    d.teacher_blocks = harness::default_teacher_blocks(teacher_depth);
  } else if (c.distill.teacher_blocks.size() == 2) {
    d.teacher_blocks = {c.distill.teacher_blocks[0], c.distill.teacher_blocks[1]};
  } else {
    throw ConfigError("distill.teacher_blocks: expected two block indices");
  }
  return d;
}

}  // namespace mae4d::cli
