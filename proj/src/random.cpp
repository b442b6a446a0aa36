#include "metafact/random.hpp"

#include <cmath>
#include <numeric>
#include <numbers>

namespace metafact {

std::uint64_t mix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

std::uint64_t Rng::below(std::uint64_t bound) {
  // Rejection sampling keeps the draw unbiased.
  const std::uint64_t limit = bound == 0 ? 0 : (~std::uint64_t{0} / bound) * bound;
  std::uint64_t x;
  do {
    x = engine_();
  } while (x >= limit);
  return x % bound;
}

Matrix Rng::gaussian(Index rows, Index cols) {
  std::vector<double> data(rows * cols);
  for (double& v : data) v = normal();
  return Matrix(rows, cols, std::move(data));
}

std::vector<Index> Rng::sample_without_replacement(Index n, Index k) {
  std::vector<Index> pool(n);
  std::iota(pool.begin(), pool.end(), Index{0});
  for (Index i = 0; i < k && i < n; ++i) {
    const Index j = i + static_cast<Index>(below(n - i));
    std::swap(pool[i], pool[j]);
  }
  pool.resize(std::min(k, n));
  return pool;
}

}  // namespace metafact
