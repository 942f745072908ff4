// SPDX-License-Identifier: Apache-2.0
#include "mae4d/readout/readout.hpp"

#include <stdexcept>

#include "mae4d/numcore/ops.hpp"
#include "mae4d/readout/fourier.hpp"
#include "mae4d/simplemae/layers.hpp"

namespace mae4d::readout {

namespace nc = numcore;
namespace sm = simplemae;

const char* to_string(QueryKind kind) {
  switch (kind) {
    case QueryKind::kLearned: return "learned";
    case QueryKind::kFourierPoint: return "fourier-point";
    case QueryKind::kFourierBox: return "fourier-box";
    case QueryKind::kSpatialPatch: return "spatial-patch";
  }
  return "?";
}

QueryKind query_kind_from_string(const std::string& s) {
  for (auto k : {QueryKind::kLearned, QueryKind::kFourierPoint, QueryKind::kFourierBox, QueryKind::kSpatialPatch}) {
    if (s == to_string(k)) return k;
  }
  throw std::invalid_argument("unknown query kind '" + s + "'");
}

std::size_t ReadoutConfig::coord_dims() const {
  switch (query_kind) {
    case QueryKind::kLearned: return 0;
    case QueryKind::kFourierPoint: return 2;
    case QueryKind::kFourierBox: return 4;
    case QueryKind::kSpatialPatch: return 3;
  }
  return 0;
}

std::size_t ReadoutConfig::query_dim() const {
  return query_kind == QueryKind::kLearned ? qkv_size : query_mlp_size;
}

void ReadoutConfig::validate() const {
  auto fail = [](const std::string& what) { throw std::invalid_argument("ReadoutConfig: " + what); };
  if (channels == 0 || frames == 0 || qkv_size == 0 || heads == 0) fail("sizes must be positive");
  if (qkv_size % heads != 0) fail("qkv_size " + std::to_string(qkv_size) + " not divisible by heads " + std::to_string(heads));
  if (output_size == 0) fail("output_size must be at least 1");
  if (num_queries == 0 || query_replicas == 0) fail("need at least one query");
  if (query_kind != QueryKind::kLearned && (fourier_bases == 0 || query_mlp_size == 0)) fail("empty Fourier query MLP");
}

std::vector<ParamSpec> readout_param_specs(const ReadoutConfig& cfg) {
  cfg.validate();
  using sm::Init;
  std::vector<ParamSpec> s;
  sm::append_layer_norm_specs(s, "feat_ln", cfg.channels);
  s.push_back({"temporal_embed", {cfg.frames, cfg.channels}, Init::kTruncatedNormal});
  if (cfg.query_kind == QueryKind::kLearned) {
    s.push_back({"queries", {cfg.num_queries, cfg.qkv_size}, Init::kTruncatedNormal});
  } else {
    const std::size_t raw = cfg.coord_dims() * 2 * cfg.fourier_bases;
    sm::append_linear_specs(s, "query_mlp.fc1", raw, cfg.query_mlp_size);
    sm::append_linear_specs(s, "query_mlp.fc2", cfg.query_mlp_size, cfg.query_mlp_size);
  }
  if (cfg.query_replicas > 1) {
    s.push_back({"replica_embed", {cfg.query_replicas, cfg.query_dim()}, Init::kTruncatedNormal});
  }
  if (cfg.query_dim() != cfg.qkv_size) sm::append_linear_specs(s, "attn.q", cfg.query_dim(), cfg.qkv_size);
  sm::append_linear_specs(s, "attn.k", cfg.channels, cfg.qkv_size);
  sm::append_linear_specs(s, "attn.v", cfg.channels, cfg.qkv_size);
  sm::append_linear_specs(s, "attn.out", cfg.qkv_size, cfg.qkv_size);
  sm::append_layer_norm_specs(s, "mlp_ln", cfg.qkv_size);
  sm::append_linear_specs(s, "mlp.fc1", cfg.qkv_size, 4 * cfg.qkv_size);
  sm::append_linear_specs(s, "mlp.fc2", 4 * cfg.qkv_size, cfg.qkv_size);
  sm::append_linear_specs(s, "out", cfg.qkv_size, cfg.output_size);
  return s;
}

std::size_t count_readout_parameters(const ReadoutConfig& cfg) { return sm::count_values(readout_param_specs(cfg)); }

ReadoutConfig table_readout(const std::string& name) {
  ReadoutConfig c;
  c.channels = 1024;
  c.frames = 16;
  c.query_mlp_size = 512;
  if (name == "ssv2") {
    c.qkv_size = 768;
    c.heads = 12;
    c.output_size = 174;
  } else if (name == "k700") {
    c.qkv_size = 1024;
    c.heads = 16;
    c.output_size = 700;
  } else if (name == "re10k") {
    // First and last frame features concatenated along channels.
    c.channels = 2048;
    c.frames = 1;
    c.qkv_size = 256;
    c.heads = 8;
    c.output_size = 12;
  } else if (name == "scannet") {
    c.qkv_size = 1024;
    c.heads = 16;
    c.num_queries = 8 * 28 * 28;
    c.output_size = 128;
  } else if (name == "waymo") {
    c.qkv_size = 1024;
    c.heads = 4;
    c.query_kind = QueryKind::kFourierBox;
    c.output_size = 16 * 4;
  } else if (name == "perception") {
    c.qkv_size = 1024;
    c.heads = 8;
    c.query_kind = QueryKind::kFourierPoint;
    c.query_replicas = 8;
    c.output_size = 2 * 4;
  } else {
    throw std::invalid_argument("unknown readout table entry '" + name + "'");
  }
  return c;
}

std::vector<std::string> table_readout_names() { return {"ssv2", "k700", "re10k", "scannet", "waymo", "perception"}; }

Var readout_queries(const Binder& p, const ReadoutConfig& cfg, const Array& coords) {
  Var q;
  if (cfg.query_kind == QueryKind::kLearned) {
    q = p("queries");
  } else {
    if (coords.empty() || coords.rank() != 2 || coords.dim(1) != cfg.coord_dims()) {
      throw nc::ShapeError(std::string("readout_queries: ") + to_string(cfg.query_kind) + " queries need [N, " +
                           std::to_string(cfg.coord_dims()) + "] coordinates, got " +
                           (coords.empty() ? std::string("none") : nc::to_string(coords.shape())));
    }
    q = sm::mlp(p, "query_mlp", nc::constant(fourier_features(coords, cfg.fourier_bases)));
  }
  if (cfg.query_replicas > 1) {
    const std::size_t n = q.shape()[0];
    const std::size_t d = q.shape()[1];
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t r = 0; r < cfg.query_replicas; ++r) rows.push_back(i);
    const Var rep = nc::reshape(nc::gather(q, rows), {n, cfg.query_replicas, d});
    q = nc::reshape(nc::add(rep, p("replica_embed")), {n * cfg.query_replicas, d});
  }
  return q;
}

Var readout_forward(const Binder& p, const ReadoutConfig& cfg, const Var& features, const Var& queries) {
  const auto& fs = features.shape();
  if (fs.size() != 3 || fs[0] != cfg.frames || fs[2] != cfg.channels) {
    throw nc::ShapeError("readout_forward: features " + nc::to_string(fs) + " do not match [" +
                         std::to_string(cfg.frames) + ", K, " + std::to_string(cfg.channels) + "]");
  }
  if (queries.shape().size() != 2 || queries.shape()[1] != cfg.query_dim()) {
    throw nc::ShapeError("readout_forward: queries " + nc::to_string(queries.shape()) + " do not match query dim " +
                         std::to_string(cfg.query_dim()));
  }
  const std::size_t T = fs[0], K = fs[1], C = fs[2];
  // [T, K, C] -> [K, T, C] so the per-frame embedding broadcasts as a suffix.
  const Var normed = nc::permute(sm::layer_norm_affine(p, "feat_ln", features), {1, 0, 2});
  const Var tokens = nc::reshape(nc::add(normed, p("temporal_embed")), {K * T, C});
  const Var k = nc::linear(tokens, p("attn.k.w"), p("attn.k.b"));
  const Var v = nc::linear(tokens, p("attn.v.w"), p("attn.v.b"));
  const Var q = cfg.query_dim() != cfg.qkv_size ? nc::linear(queries, p("attn.q.w"), p("attn.q.b")) : queries;
  const Var att = nc::linear(sm::multi_head_attention(q, k, v, cfg.heads), p("attn.out.w"), p("attn.out.b"));
  const Var x = nc::add(att, sm::mlp(p, "mlp", sm::layer_norm_affine(p, "mlp_ln", att)));
  return nc::linear(x, p("out.w"), p("out.b"));
}

}  // namespace mae4d::readout
