#pragma once

#include <string_view>
#include <vector>

#include "metafact/core.hpp"

/// The generalized projector equation Yᵀ·F = Z_c, Hᵀ·X = Z_r with
/// Z_c^N = Z_r^N = I_k. A single application of the projectors twists A;
/// N applications restore it.
namespace metafact::periodic {

/// Pair of k x k generators of finite order N. The constructor checks
/// ‖Z^N − I‖_F <= 1e-10·√k for both and throws InvalidPeriod otherwise.
class PeriodicGenerators {
 public:
  PeriodicGenerators(Matrix z_c, Matrix z_r, Index n_period);

  const Matrix& z_c() const noexcept { return z_c_; }
  const Matrix& z_r() const noexcept { return z_r_; }
  Index n_period() const noexcept { return n_period_; }
  Index k() const noexcept { return z_c_.rows(); }

 private:
  Matrix z_c_;
  Matrix z_r_;
  Index n_period_;
};

enum class GeneratorKind { Shift, Rotation };

std::string_view kind_name(GeneratorKind kind) noexcept;

/// Shift: block diagonal of N-cycles (N must divide k), row i of each block
/// has its one in column (i+1) mod N. Rotation: block diagonal of planar
/// rotations by 2π/N (k must be even); entries within 4ε of zero are set to
/// zero. Throws InvalidPeriod.
Matrix make_cyclic_generator(Index k, Index n_period, GeneratorKind kind);

/// Z^p by repeated multiplication.
Matrix matrix_power(const Matrix& z, Index p);

struct PeriodicFactorization {
  core::MetaFactorization meta;
  core::ProjectorPair pair;
};

/// Yᵀ = Z_c·F⁺ and X = (Hᵀ)⁺·Z_r through the SVD pseudoinverse, and
/// g = Z_c·F⁺·A·(Hᵀ)⁺·Z_r. The report's idempotency fields describe the
/// single-application projectors, which are not idempotent for N > 1.
/// Throws RankDeficientAnchor when f or h has rank below k.
PeriodicFactorization periodic_meta_factorize(const Matrix& a, const core::BasisPair& basis,
                                              const PeriodicGenerators& gen);

struct PowerDefects {
  double column = 0.0;  ///< ‖(F·Yᵀ)^N − F·F⁺‖_F / ‖F·F⁺‖_F
  double row = 0.0;     ///< ‖(X·Hᵀ)^N − (Hᵀ)⁺·Hᵀ‖_F / ‖(Hᵀ)⁺·Hᵀ‖_F
};

PowerDefects projector_power_defects(const core::BasisPair& basis, const core::ProjectorPair& pair,
                                     Index n_period);

struct PowerResidual {
  Index power = 0;  ///< number of projector applications
  bool multiple_of_period = false;
  double residual_rel = 0.0;  ///< ‖(FYᵀ)^t·A·(XHᵀ)^t − A‖_F / ‖A‖_F
};

struct PeriodicityReport {
  Index n_period = 1;
  Index p_max = 0;
  std::vector<PowerResidual> powers;  ///< t = 0, 1, ..., N·p_max
  double max_period_residual = 0.0;   ///< over multiples of N
  double tolerance = 1e-8;
  bool holds = true;
};

/// Applies the projectors to A one power at a time, F·(Yᵀ·A_t) on the left
/// and (A_t·X)·Hᵀ on the right, recording every power up to N·p_max.
PeriodicityReport verify_periodicity(const Matrix& a, const core::BasisPair& basis,
                                     const core::ProjectorPair& pair, const PeriodicGenerators& gen,
                                     Index p_max);

}  // namespace metafact::periodic
