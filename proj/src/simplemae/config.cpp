// SPDX-License-Identifier: Apache-2.0
#include "mae4d/simplemae/config.hpp"

#include <stdexcept>

namespace mae4d::simplemae {

namespace {

std::string str(const Extent3& e) {
  return std::to_string(e.t) + "x" + std::to_string(e.h) + "x" + std::to_string(e.w);
}

ModelConfig table_config(const std::string& name, std::size_t width, std::size_t depth, std::size_t mlp,
                         std::size_t heads) {
  ModelConfig c;
  c.name = name;
  c.width = width;
  c.depth = depth;
  c.mlp = mlp;
  c.heads = heads;
  return c;
}

ModelConfig desk_config(const std::string& name, std::size_t width, std::size_t depth, std::size_t mlp,
                        std::size_t heads) {
  ModelConfig c;
  c.name = name;
  c.width = width;
  c.depth = depth;
  c.mlp = mlp;
  c.heads = heads;
  c.input_patch = {2, 8, 8};
  c.latent_layers = 2;
  c.decode_grid = {8, 4, 4};
  c.output_patch = {2, 8, 8};
  c.clip = {16, 32, 32};
  return c;
}

}  // namespace

Extent3 ModelConfig::token_grid() const {
  return {clip.t / input_patch.t, clip.h / input_patch.h, clip.w / input_patch.w};
}

std::size_t ModelConfig::token_count() const { return token_grid().volume(); }

void ModelConfig::validate() const {
  auto fail = [this](const std::string& what) { throw std::invalid_argument("ModelConfig '" + name + "': " + what); };
  if (width == 0 || depth == 0 || mlp == 0 || heads == 0) fail("width, depth, mlp and heads must be positive");
  if (width % heads != 0) fail("width " + std::to_string(width) + " not divisible by heads " + std::to_string(heads));
  if (latent_layers == 0 || latent_layers > depth) fail("latent_layers must be in [1, depth]");
  if (!(mask_ratio > 0.0 && mask_ratio < 1.0)) fail("mask_ratio must lie in (0, 1)");
  for (const Extent3* e : {&input_patch, &decode_grid, &output_patch, &clip}) {
    if (e->t == 0 || e->h == 0 || e->w == 0) fail("zero extent");
  }
  if (clip.t % input_patch.t || clip.h % input_patch.h || clip.w % input_patch.w) {
    fail("clip " + str(clip) + " not divisible by input patch " + str(input_patch));
  }
  const Extent3 covered{decode_grid.t * output_patch.t, decode_grid.h * output_patch.h, decode_grid.w * output_patch.w};
  if (!(covered == clip)) {
    fail("decode grid " + str(decode_grid) + " x output patch " + str(output_patch) + " covers " + str(covered) +
         ", not the clip " + str(clip));
  }
}

ModelConfig named_config(const std::string& name) {
  if (name == "S") return table_config(name, 384, 12, 1536, 6);
  if (name == "B") return table_config(name, 768, 12, 3072, 12);
  if (name == "L") return table_config(name, 1024, 24, 4096, 16);
  if (name == "H") return table_config(name, 1280, 32, 5120, 16);
  if (name == "G") return table_config(name, 1664, 48, 8192, 16);
  if (name == "e") return table_config(name, 1792, 56, 15360, 16);
  if (name == "j") {
    ModelConfig c = table_config(name, 4096, 64, 32768, 32);
    c.clip = {16, 256, 256};
    c.latent_layers = 2;
    c.output_patch = {4, 32, 32};
    c.decode_grid = {4, 8, 8};
    return c;
  }
  if (name == "nano") return desk_config(name, 64, 4, 256, 4);
  if (name == "micro") return desk_config(name, 128, 6, 512, 8);
  throw std::invalid_argument("unknown model config '" + name + "'");
}

std::vector<std::string> config_names() { return {"S", "B", "L", "H", "G", "e", "j", "nano", "micro"}; }

void to_json(nlohmann::json& j, const Extent3& e) { j = nlohmann::json::array({e.t, e.h, e.w}); }

void from_json(const nlohmann::json& j, Extent3& e) {
  if (!j.is_array() || j.size() != 3) throw std::invalid_argument("extent must be a 3-element array");
  e.t = j[0].get<std::size_t>();
  e.h = j[1].get<std::size_t>();
  e.w = j[2].get<std::size_t>();
}

void to_json(nlohmann::json& j, const ModelConfig& c) {
  j = nlohmann::json{{"name", c.name},
                     {"width", c.width},
                     {"depth", c.depth},
                     {"mlp", c.mlp},
                     {"heads", c.heads},
                     {"input_patch", c.input_patch},
                     {"latent_layers", c.latent_layers},
                     {"decode_grid", c.decode_grid},
                     {"output_patch", c.output_patch},
                     {"mask_ratio", c.mask_ratio},
                     {"clip", c.clip}};
}

void from_json(const nlohmann::json& j, ModelConfig& c) {
  // Start from a named base when given so partial overrides work.
  if (j.contains("name")) {
    const auto n = j.at("name").get<std::string>();
    try {
      c = named_config(n);
    } catch (const std::invalid_argument&) {
      c.name = n;
    }
  }
  if (j.contains("width")) c.width = j.at("width").get<std::size_t>();
  if (j.contains("depth")) c.depth = j.at("depth").get<std::size_t>();
  if (j.contains("mlp")) c.mlp = j.at("mlp").get<std::size_t>();
  if (j.contains("heads")) c.heads = j.at("heads").get<std::size_t>();
  if (j.contains("input_patch")) c.input_patch = j.at("input_patch").get<Extent3>();
  if (j.contains("latent_layers")) c.latent_layers = j.at("latent_layers").get<std::size_t>();
  if (j.contains("decode_grid")) c.decode_grid = j.at("decode_grid").get<Extent3>();
  if (j.contains("output_patch")) c.output_patch = j.at("output_patch").get<Extent3>();
  if (j.contains("mask_ratio")) c.mask_ratio = j.at("mask_ratio").get<double>();
  if (j.contains("clip")) c.clip = j.at("clip").get<Extent3>();
}

}  // namespace mae4d::simplemae
