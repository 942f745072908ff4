// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "mae4d/simplemae/params.hpp"

namespace mae4d::simplemae {

/// Layer norm over the last axis followed by a learned scale/shift
/// (`<prefix>.g`, `<prefix>.b`).
Var layer_norm_affine(const Binder& p, const std::string& prefix, const Var& x);

/// Multi-head scaled dot-product attention on already projected inputs.
/// q: [nq, D], k and v: [nk, D]; D divisible by heads. Returns [nq, D].
Var multi_head_attention(const Var& q, const Var& k, const Var& v, std::size_t heads);

/// Two-layer GELU MLP: `<prefix>.fc1` then `<prefix>.fc2`.
Var mlp(const Binder& p, const std::string& prefix, const Var& x);

/// Pre-norm transformer block over tokens x: [n, C].
Var transformer_block(const Binder& p, const std::string& prefix, const Var& x, std::size_t heads);

void append_linear_specs(std::vector<ParamSpec>& specs, const std::string& prefix, std::size_t in, std::size_t out);
void append_layer_norm_specs(std::vector<ParamSpec>& specs, const std::string& prefix, std::size_t n);
void append_block_specs(std::vector<ParamSpec>& specs, const std::string& prefix, std::size_t width, std::size_t mlp);

}  // namespace mae4d::simplemae
