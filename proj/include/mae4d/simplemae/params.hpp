// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "mae4d/numcore/autodiff.hpp"

namespace mae4d::simplemae {

using numcore::Array;
using numcore::Shape;
using numcore::Var;

enum class Init { kTruncatedNormal, kZeros, kOnes };

struct ParamSpec {
  std::string name;
  Shape shape;
  Init init = Init::kTruncatedNormal;
};

/// Weight-initialisation scale for every truncated-normal tensor.
inline constexpr double kInitStd = 0.02;

/// Learned positional/temporal embeddings and layer-norm parameters are
/// exempt from weight decay. Recognised by naming convention: a path segment
/// starting with "ln" or ending in "_ln", or a name ending in "_embed".
bool is_decay_excluded(const std::string& name);

std::size_t count_values(const std::vector<ParamSpec>& specs);

/// Named tensors in deterministic (lexicographic) order.
class ParamSet {
 public:
  using Map = std::map<std::string, Array>;

  void set(const std::string& name, Array value) { tensors_[name] = std::move(value); }
  bool contains(const std::string& name) const { return tensors_.count(name) != 0; }
  const Array& at(const std::string& name) const;
  Array& at(const std::string& name);
  void erase(const std::string& name) { tensors_.erase(name); }

  std::size_t size() const { return tensors_.size(); }
  std::size_t value_count() const;

  Map::const_iterator begin() const { return tensors_.begin(); }
  Map::const_iterator end() const { return tensors_.end(); }
  Map::iterator begin() { return tensors_.begin(); }
  Map::iterator end() { return tensors_.end(); }

  /// Content hash (FNV-1a over names, shapes and value bits, in name order).
  std::uint64_t hash() const;

 private:
  Map tensors_;
};

ParamSet init_params(const std::vector<ParamSpec>& specs, std::uint64_t seed);

/// Exposes parameters as graph leaves for one forward/backward pass.
///
/// Each name is bound lazily on first use. Frozen sources produce constants,
/// so no gradient graph is built through them.
class Binder {
 public:
  Binder() = default;
  Binder(const ParamSet& params, bool trainable) { add(params, trainable); }

  Binder& add(const ParamSet& params, bool trainable);

  Var operator()(const std::string& name) const;
  bool contains(const std::string& name) const;

  /// Gradients of every trainable tensor (zeros for tensors that were bound
  /// but unused, or never bound). Valid after numcore::backward.
  ParamSet grads() const;

 private:
  struct Source {
    const ParamSet* params;
    bool trainable;
  };
  std::vector<Source> sources_;
  mutable std::map<std::string, Var> bound_;
};

}  // namespace mae4d::simplemae
