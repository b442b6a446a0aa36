#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "metafact/matrix.hpp"

namespace metafact {

/// splitmix64 finalizer; derives per-trial seeds as mix64(master + trial).
std::uint64_t mix64(std::uint64_t x) noexcept;

inline std::uint64_t trial_seed(std::uint64_t master, std::uint64_t trial) noexcept {
  return mix64(master + trial);
}

/// Seeded generator with a bit-specified output stream: mt19937_64 for the
/// raw bits, 53-bit uniforms and Box-Muller normals. std::normal_distribution
/// is avoided because its output is implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1).
  double uniform();
  double normal();
  /// Uniform integer in [0, bound).
  std::uint64_t below(std::uint64_t bound);

  /// Row-major fill of an m x n standard normal matrix.
  Matrix gaussian(Index rows, Index cols);
  /// k distinct indices from [0, n) in draw order (partial Fisher-Yates).
  std::vector<Index> sample_without_replacement(Index n, Index k);

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace metafact
