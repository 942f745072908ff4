// SPDX-License-Identifier: Apache-2.0
#include "mae4d/simplemae/layers.hpp"

#include <cmath>

#include "mae4d/numcore/ops.hpp"

namespace mae4d::simplemae {

namespace nc = numcore;

Var layer_norm_affine(const Binder& p, const std::string& prefix, const Var& x) {
  return nc::add(nc::mul(nc::layer_norm(x), p(prefix + ".g")), p(prefix + ".b"));
}

Var multi_head_attention(const Var& q, const Var& k, const Var& v, std::size_t heads) {
  const std::size_t nq = q.shape()[0];
  const std::size_t nk = k.shape()[0];
  const std::size_t dim = q.shape()[1];
  if (k.shape()[1] != dim || v.shape() != k.shape() || dim % heads != 0) {
    throw nc::ShapeError("multi_head_attention: q " + nc::to_string(q.shape()) + ", k " + nc::to_string(k.shape()) +
                         ", v " + nc::to_string(v.shape()) + ", heads " + std::to_string(heads));
  }
  const std::size_t hd = dim / heads;
  auto split = [heads, hd](const Var& x, std::size_t n) { return nc::transpose(nc::reshape(x, {n, heads, hd}), 0, 1); };
  const Var qh = split(q, nq);
  const Var kh = split(k, nk);
  const Var vh = split(v, nk);
  const Var scores = nc::scale(nc::matmul(qh, nc::transpose(kh, 1, 2)), 1.0 / std::sqrt(static_cast<double>(hd)));
  const Var out = nc::matmul(nc::softmax(scores), vh);
  return nc::reshape(nc::transpose(out, 0, 1), {nq, dim});
}

Var mlp(const Binder& p, const std::string& prefix, const Var& x) {
  const Var h = nc::gelu(nc::linear(x, p(prefix + ".fc1.w"), p(prefix + ".fc1.b")));
  return nc::linear(h, p(prefix + ".fc2.w"), p(prefix + ".fc2.b"));
}

Var transformer_block(const Binder& p, const std::string& prefix, const Var& x, std::size_t heads) {
  const std::size_t width = x.shape()[1];
  const Var h = layer_norm_affine(p, prefix + ".ln1", x);
  const Var qkv = nc::linear(h, p(prefix + ".attn.qkv.w"), p(prefix + ".attn.qkv.b"));
  const Var q = nc::slice(qkv, 1, 0, width);
  const Var k = nc::slice(qkv, 1, width, width);
  const Var v = nc::slice(qkv, 1, 2 * width, width);
  const Var att = multi_head_attention(q, k, v, heads);
  const Var y = nc::add(x, nc::linear(att, p(prefix + ".attn.out.w"), p(prefix + ".attn.out.b")));
  return nc::add(y, mlp(p, prefix + ".mlp", layer_norm_affine(p, prefix + ".ln2", y)));
}

void append_linear_specs(std::vector<ParamSpec>& specs, const std::string& prefix, std::size_t in, std::size_t out) {
  specs.push_back({prefix + ".w", {in, out}, Init::kTruncatedNormal});
  specs.push_back({prefix + ".b", {out}, Init::kZeros});
}

void append_layer_norm_specs(std::vector<ParamSpec>& specs, const std::string& prefix, std::size_t n) {
  specs.push_back({prefix + ".g", {n}, Init::kOnes});
  specs.push_back({prefix + ".b", {n}, Init::kZeros});
}

void append_block_specs(std::vector<ParamSpec>& specs, const std::string& prefix, std::size_t width, std::size_t mlp) {
  append_layer_norm_specs(specs, prefix + ".ln1", width);
  append_linear_specs(specs, prefix + ".attn.qkv", width, 3 * width);
  append_linear_specs(specs, prefix + ".attn.out", width, width);
  append_layer_norm_specs(specs, prefix + ".ln2", width);
  append_linear_specs(specs, prefix + ".mlp.fc1", width, mlp);
  append_linear_specs(specs, prefix + ".mlp.fc2", mlp, width);
}

}  // namespace mae4d::simplemae
