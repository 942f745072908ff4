// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <set>
#include <stdexcept>
#include <string>

#include "mae4d/simplemae/params.hpp"

namespace mae4d::harness {

using numcore::Array;
using numcore::Var;
using simplemae::ParamSet;

struct AdamWHyper {
  double b1 = 0.9;
  double b2 = 0.95;
  double eps = 1e-8;
  double weight_decay = 0.05;
};

/// Moments for every parameter, the step count and the names exempt from
/// weight decay.
struct OptimState {
  AdamWHyper hyper;
  ParamSet m;
  ParamSet v;
  std::size_t step = 0;
  std::set<std::string> no_decay;
};

/// Zero moments shaped like `params`. Names matching
/// simplemae::is_decay_excluded go into the exclusion set.
OptimState init_adamw(const ParamSet& params, const AdamWHyper& hyper = {});

/// Thrown before any parameter is touched when a gradient holds NaN or Inf.
class NonFiniteGradient : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One decoupled-weight-decay Adam step at learning rate `lr`:
///
///   m <- b1 m + (1 - b1) g          v <- b2 v + (1 - b2) g^2
///   p <- p - lr (m_hat / (sqrt(v_hat) + eps) + wd p)
///
/// with bias-corrected m_hat, v_hat, and wd = 0 for excluded names. Every
/// parameter must have a gradient of the same shape.
void adamw_step(ParamSet& params, const ParamSet& grads, OptimState& state, double lr);

/// Linear warmup from 0 to base_lr over `warmup_steps`, then cosine decay to
/// `floor_lr` at `total_steps`.
struct Schedule {
  double base_lr = 1e-3;
  std::size_t warmup_steps = 0;
  std::size_t total_steps = 1;
  double floor_lr = 1e-7;

  void validate() const;
  /// Learning rate used for the update at `step` (0-based); constant at the
  /// floor beyond total_steps.
  double lr(std::size_t step) const;
};

}  // namespace mae4d::harness
