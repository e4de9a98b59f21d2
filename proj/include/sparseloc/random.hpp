// Copyright 2026 The sparseloc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <random>
#include <vector>

namespace sparseloc {

/// splitmix64 finalizer applied to base ^ golden-ratio-scaled index.
/// Used to derive per-trial and per-purpose seeds from a single base seed.
std::uint64_t mix_seed(std::uint64_t base, std::uint64_t index);

/// Seeded generator with platform-independent variate mappings.
///
/// std::mt19937_64 output is specified by the standard, the std::*_distribution
/// adaptors are not, so the mappings to uniform/normal variates live here.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  /// Standard normal (Box-Muller, no cached second variate).
  double normal();
  /// Uniform integer in [0, n).
  int below(int n);
  /// k distinct indices from [0, n), returned sorted.
  std::vector<int> sample_without_replacement(int n, int k);

 private:
  std::mt19937_64 engine_;
};

}  // namespace sparseloc
