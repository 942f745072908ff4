// SPDX-License-Identifier: Apache-2.0
#include "mae4d/simplemae/params.hpp"

#include <cstring>
#include <stdexcept>

#include "mae4d/numcore/random.hpp"

namespace mae4d::simplemae {

bool is_decay_excluded(const std::string& name) {
  auto ends_with = [](const std::string& s, const std::string& suffix) {
    return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
  };
  std::size_t start = 0;
  while (start <= name.size()) {
    std::size_t dot = name.find('.', start);
    if (dot == std::string::npos) dot = name.size();
    const std::string seg = name.substr(start, dot - start);
    if (seg.rfind("ln", 0) == 0 || ends_with(seg, "_ln")) return true;
    start = dot + 1;
  }
  return ends_with(name, "_embed");
}

std::size_t count_values(const std::vector<ParamSpec>& specs) {
  std::size_t n = 0;
  for (const auto& s : specs) n += numcore::numel(s.shape);
  return n;
}

const Array& ParamSet::at(const std::string& name) const {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) throw std::out_of_range("parameter '" + name + "' not found");
  return it->second;
}

Array& ParamSet::at(const std::string& name) {
  auto it = tensors_.find(name);
  if (it == tensors_.end()) throw std::out_of_range("parameter '" + name + "' not found");
  return it->second;
}

std::size_t ParamSet::value_count() const {
  std::size_t n = 0;
  for (const auto& [_, a] : tensors_) n += a.size();
  return n;
}

std::uint64_t ParamSet::hash() const {
  std::uint64_t h = 1469598103934665603ULL;
  auto feed = [&h](const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 1099511628211ULL;
    }
  };
  for (const auto& [name, a] : tensors_) {
    feed(name.data(), name.size());
    for (auto d : a.shape()) feed(&d, sizeof d);
    feed(a.ptr(), a.size() * sizeof(double));
  }
  return h;
}

ParamSet init_params(const std::vector<ParamSpec>& specs, std::uint64_t seed) {
  numcore::Rng rng(seed);
  ParamSet p;
  for (const auto& s : specs) {
    switch (s.init) {
      case Init::kTruncatedNormal:
        p.set(s.name, rng.truncated_normal_array(s.shape, kInitStd));
        break;
      case Init::kZeros:
        p.set(s.name, Array(s.shape, 0.0));
        break;
      case Init::kOnes:
        p.set(s.name, Array(s.shape, 1.0));
        break;
    }
  }
  return p;
}

Binder& Binder::add(const ParamSet& params, bool trainable) {
  sources_.push_back({&params, trainable});
  return *this;
}

bool Binder::contains(const std::string& name) const {
  for (const auto& s : sources_) {
    if (s.params->contains(name)) return true;
  }
  return false;
}

Var Binder::operator()(const std::string& name) const {
  if (auto it = bound_.find(name); it != bound_.end()) return it->second;
  for (const auto& s : sources_) {
    if (s.params->contains(name)) {
      const Array& value = s.params->at(name);
      Var v = s.trainable ? numcore::leaf(value) : numcore::constant(value);
      bound_.emplace(name, v);
      return v;
    }
  }
  throw std::out_of_range("parameter '" + name + "' not bound");
}

ParamSet Binder::grads() const {
  ParamSet g;
  for (const auto& s : sources_) {
    if (!s.trainable) continue;
    for (const auto& [name, value] : *s.params) {
      auto it = bound_.find(name);
      if (it != bound_.end() && !it->second.grad().empty()) {
        g.set(name, it->second.grad());
      } else {
        g.set(name, Array(value.shape(), 0.0));
      }
    }
  }
  return g;
}

}  // namespace mae4d::simplemae
