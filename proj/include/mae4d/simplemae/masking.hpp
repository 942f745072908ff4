// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace mae4d::simplemae {

/// Partition of a clip's token indices into visible (kept) and masked sets.
/// Both lists are sorted and together cover 0..total-1 exactly once.
struct MaskPlan {
  std::vector<std::size_t> kept;
  std::vector<std::size_t> masked;
  std::size_t total = 0;

  static MaskPlan all_visible(std::size_t total);
  /// Throws std::logic_error if the partition invariant does not hold.
  void validate() const;
};

/// Number of masked tokens: floor(ratio * total). Representation error in
/// the product (e.g. 0.95 * 100) is absorbed before flooring.
std::size_t masked_count(std::size_t total, double ratio);
std::size_t kept_count(std::size_t total, double ratio);

/// Uniform random masking without replacement. No tubes or structured
/// patterns: every token is equally likely to stay visible.
MaskPlan sample_mask(std::size_t total, double ratio, std::uint64_t seed);

}  // namespace mae4d::simplemae
