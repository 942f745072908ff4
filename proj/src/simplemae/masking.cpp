// SPDX-License-Identifier: Apache-2.0
#include "mae4d/simplemae/masking.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "mae4d/numcore/random.hpp"

namespace mae4d::simplemae {

MaskPlan MaskPlan::all_visible(std::size_t total) {
  MaskPlan p;
  p.total = total;
  p.kept.resize(total);
  std::iota(p.kept.begin(), p.kept.end(), std::size_t{0});
  return p;
}

void MaskPlan::validate() const {
  if (kept.size() + masked.size() != total) throw std::logic_error("MaskPlan: sizes do not add up to total");
  if (!std::is_sorted(kept.begin(), kept.end()) || !std::is_sorted(masked.begin(), masked.end())) {
    throw std::logic_error("MaskPlan: index lists must be sorted");
  }
  std::vector<char> seen(total, 0);
  for (const auto* list : {&kept, &masked}) {
    for (auto i : *list) {
      if (i >= total || seen[i]) throw std::logic_error("MaskPlan: index out of range or duplicated");
      seen[i] = 1;
    }
  }
}

std::size_t masked_count(std::size_t total, double ratio) {
  if (!(ratio > 0.0 && ratio < 1.0)) {
    throw std::invalid_argument("mask ratio must lie in (0, 1), got " + std::to_string(ratio));
  }
  return static_cast<std::size_t>(std::floor(ratio * static_cast<double>(total) + 1e-9));
}

std::size_t kept_count(std::size_t total, double ratio) { return total - masked_count(total, ratio); }

MaskPlan sample_mask(std::size_t total, double ratio, std::uint64_t seed) {
  const std::size_t n_masked = masked_count(total, ratio);
  numcore::Rng rng(seed);
  const auto perm = rng.permutation(total);
  MaskPlan p;
  p.total = total;
  p.masked.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_masked));
  p.kept.assign(perm.begin() + static_cast<std::ptrdiff_t>(n_masked), perm.end());
  std::sort(p.masked.begin(), p.masked.end());
  std::sort(p.kept.begin(), p.kept.end());
  return p;
}

}  // namespace mae4d::simplemae
