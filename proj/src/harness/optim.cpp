// SPDX-License-Identifier: Apache-2.0
#include "mae4d/harness/optim.hpp"

#include <cmath>
#include <numbers>

namespace mae4d::harness {

OptimState init_adamw(const ParamSet& params, const AdamWHyper& hyper) {
  OptimState s;
  s.hyper = hyper;
  for (const auto& [name, value] : params) {
    s.m.set(name, Array(value.shape()));
    s.v.set(name, Array(value.shape()));
    if (simplemae::is_decay_excluded(name)) s.no_decay.insert(name);
  }
  return s;
}

void adamw_step(ParamSet& params, const ParamSet& grads, OptimState& state, double lr) {
  for (const auto& [name, p] : params) {
    if (!grads.contains(name)) throw std::invalid_argument("adamw_step: no gradient for '" + name + "'");
    const Array& g = grads.at(name);
    if (!numcore::same_shape(g, p) || !numcore::same_shape(state.m.at(name), p)) {
      throw numcore::ShapeError("adamw_step: '" + name + "' has shape " + numcore::to_string(p.shape()) +
                                ", gradient " + numcore::to_string(g.shape()));
    }
    for (double x : g.data()) {
      if (!std::isfinite(x)) {
        throw NonFiniteGradient("non-finite gradient in '" + name + "' at optimizer step " +
                                std::to_string(state.step + 1));
      }
    }
  }
  const AdamWHyper& h = state.hyper;
  ++state.step;
  const double c1 = 1.0 - std::pow(h.b1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(h.b2, static_cast<double>(state.step));
  for (auto& [name, p] : params) {
    const Array& g = grads.at(name);
    Array& m = state.m.at(name);
    Array& v = state.v.at(name);
    const double wd = state.no_decay.count(name) ? 0.0 : h.weight_decay;
    for (std::size_t i = 0; i < p.size(); ++i) {
      m[i] = h.b1 * m[i] + (1.0 - h.b1) * g[i];
      v[i] = h.b2 * v[i] + (1.0 - h.b2) * g[i] * g[i];
      const double update = (m[i] / c1) / (std::sqrt(v[i] / c2) + h.eps);
      p[i] -= lr * (update + wd * p[i]);
    }
  }
}

void Schedule::validate() const {
  if (total_steps == 0) throw std::invalid_argument("schedule: total_steps must be positive");
  if (warmup_steps > total_steps) throw std::invalid_argument("schedule: warmup longer than the run");
  if (!(base_lr > 0.0) || floor_lr < 0.0 || floor_lr > base_lr) {
    throw std::invalid_argument("schedule: need 0 <= floor_lr <= base_lr and base_lr > 0");
  }
}

double Schedule::lr(std::size_t step) const {
  if (step >= total_steps) return floor_lr;
  if (step < warmup_steps) return base_lr * static_cast<double>(step) / static_cast<double>(warmup_steps);
  const double progress = static_cast<double>(step - warmup_steps) / static_cast<double>(total_steps - warmup_steps);
  return floor_lr + (base_lr - floor_lr) * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

}  // namespace mae4d::harness
