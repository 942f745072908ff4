// SPDX-License-Identifier: Apache-2.0
#include "mae4d/simplemae/container.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <vector>

#include "mae4d/simplemae/model.hpp"

namespace mae4d::simplemae {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kMagic = "MAE4D-CONTAINER 1";

static_assert(std::endian::native == std::endian::little, "container I/O assumes a little-endian host");

}  // namespace

void write_container(const fs::path& path, const Container& c) {
  json manifest = json::array();
  std::size_t offset = 0;
  for (const auto& [name, a] : c.tensors) {
    manifest.push_back({{"name", name}, {"shape", a.shape()}, {"offset", offset}});
    offset += a.size();
  }
  const json header = {{"meta", c.meta}, {"tensors", manifest}};

  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ContainerError("cannot write " + tmp.string());
    out << kMagic << '\n' << header.dump() << '\n';
    std::vector<float> buf;
    for (const auto& [name, a] : c.tensors) {
      buf.resize(a.size());
      for (std::size_t i = 0; i < a.size(); ++i) buf[i] = static_cast<float>(a[i]);
      out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size() * sizeof(float)));
    }
    out.flush();
    if (!out) throw ContainerError("write failed for " + tmp.string());
  }
  fs::rename(tmp, path);
}

Container read_container(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ContainerError("cannot open " + path.string());
  std::string magic;
  std::string header_line;
  if (!std::getline(in, magic) || magic != kMagic) throw ContainerError(path.string() + ": not a mae4d container");
  if (!std::getline(in, header_line)) throw ContainerError(path.string() + ": missing header");
  json header;
  try {
    header = json::parse(header_line);
  } catch (const json::exception& e) {
    throw ContainerError(path.string() + ": bad header: " + e.what());
  }
  const auto payload_start = in.tellg();
  Container c;
  c.meta = header.value("meta", json::object());
  std::vector<float> buf;
  for (const auto& t : header.at("tensors")) {
    const auto name = t.at("name").get<std::string>();
    const auto shape = t.at("shape").get<numcore::Shape>();
    const auto offset = t.at("offset").get<std::size_t>();
    const std::size_t n = numcore::numel(shape);
    buf.resize(n);
    in.seekg(payload_start + static_cast<std::streamoff>(offset * sizeof(float)));
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n * sizeof(float)));
    if (!in) throw ContainerError(path.string() + ": truncated payload for tensor '" + name + "'");
    c.tensors.set(name, Array(shape, std::vector<double>(buf.begin(), buf.end())));
  }
  return c;
}

ParamSet round_to_float32(const ParamSet& params) {
  ParamSet out;
  for (const auto& [name, a] : params) {
    std::vector<double> v(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) v[i] = static_cast<double>(static_cast<float>(a[i]));
    out.set(name, Array(a.shape(), std::move(v)));
  }
  return out;
}

void save_checkpoint(const fs::path& path, const Checkpoint& ckpt) {
  Container c;
  c.meta = {{"kind", "checkpoint"}, {"config", ckpt.config}, {"extra", ckpt.extra}};
  c.tensors = ckpt.params;
  write_container(path, c);
}

Checkpoint load_checkpoint(const fs::path& path) {
  if (!fs::exists(path)) throw ContainerError("checkpoint not found: " + path.string());
  Container c = read_container(path);
  if (c.meta.value("kind", "") != "checkpoint") throw ContainerError(path.string() + ": not a checkpoint");
  Checkpoint ck;
  ck.config = c.meta.at("config").get<ModelConfig>();
  ck.extra = c.meta.value("extra", json::object());
  for (const auto& s : param_specs(ck.config)) {
    if (!c.tensors.contains(s.name)) throw ContainerError(path.string() + ": missing tensor '" + s.name + "'");
    if (c.tensors.at(s.name).shape() != s.shape) {
      throw ContainerError(path.string() + ": tensor '" + s.name + "' has shape " +
                           numcore::to_string(c.tensors.at(s.name).shape()) + ", expected " +
                           numcore::to_string(s.shape));
    }
  }
  if (c.tensors.size() != param_specs(ck.config).size()) {
    throw ContainerError(path.string() + ": unexpected extra tensors in checkpoint");
  }
  ck.params = std::move(c.tensors);
  return ck;
}

}  // namespace mae4d::simplemae
