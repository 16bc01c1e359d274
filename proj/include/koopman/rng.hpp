#pragma once

#include <cstdint>
#include <random>
#include <string>

namespace koopman {

/// Seedable uniform generator with a fixed, documented sample mapping.
///
/// Draws come from std::mt19937_64 and are mapped to [0,1) by taking the
/// top 53 bits of each 64-bit word, so sequences are reproducible for a
/// given seed independently of the standard library's distribution
/// implementations. The tag below is recorded in dataset/dictionary
/// metadata.
class Rng {
 public:
  static constexpr const char* kAlgorithm = "mt19937_64/u53";

  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform sample in [0,1).
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform sample in [lo, hi).
  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace koopman
