// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "mae4d/simplemae/params.hpp"

namespace mae4d::readout {

using numcore::Array;
using numcore::Var;
using simplemae::Binder;
using simplemae::ParamSet;
using simplemae::ParamSpec;

enum class QueryKind {
  kLearned,       // `num_queries` free vectors of size qkv_size
  kFourierPoint,  // (x, y) of a track's query point
  kFourierBox,    // (xmin, xmax, ymin, ymax) of a box in its first frame
  kSpatialPatch,  // (t, y, x) centre of an output patch
};

const char* to_string(QueryKind kind);
QueryKind query_kind_from_string(const std::string& s);

/// Cross-attention readout.
///
/// features [T, K, C] -> layer norm -> + temporal_embed[T] -> keys/values;
/// queries [Q, query_dim] -> (project to qkv_size when query_dim differs)
/// -> multi-head cross-attention with output projection -> x + MLP(LN(x))
/// with hidden size 4 * qkv_size -> linear to output_size.
///
/// Fourier queries embed their coordinates with `fourier_bases` bases and a
/// two-layer GELU MLP of width query_mlp_size. With query_replicas > 1 each
/// query is repeated and a learned replica embedding added before projection.
struct ReadoutConfig {
  std::size_t channels = 64;
  std::size_t frames = 16;
  std::size_t qkv_size = 64;
  std::size_t heads = 4;
  QueryKind query_kind = QueryKind::kLearned;
  std::size_t num_queries = 1;
  std::size_t fourier_bases = 16;
  std::size_t query_mlp_size = 512;
  std::size_t query_replicas = 1;
  std::size_t output_size = 1;

  std::size_t coord_dims() const;
  std::size_t query_dim() const;
  void validate() const;
};

std::vector<ParamSpec> readout_param_specs(const ReadoutConfig& cfg);
std::size_t count_readout_parameters(const ReadoutConfig& cfg);

/// Readout configurations with the published channel/head/output settings
/// on 1024-channel features: "ssv2", "k700", "re10k", "scannet", "waymo",
/// "perception".
ReadoutConfig table_readout(const std::string& name);
std::vector<std::string> table_readout_names();

/// Query matrix [Q * replicas, query_dim]. `coords` ([Q, coord_dims] in
/// [0, 1]) is required for Fourier kinds and ignored for learned queries.
Var readout_queries(const Binder& p, const ReadoutConfig& cfg, const Array& coords = {});

/// Outputs [num_queries, output_size]. features: [T, K, C].
Var readout_forward(const Binder& p, const ReadoutConfig& cfg, const Var& features, const Var& queries);

}  // namespace mae4d::readout
