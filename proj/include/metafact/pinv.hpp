#pragma once

#include <optional>
#include <vector>

#include "metafact/core.hpp"

/// Explicit pseudoinverse formulas derived by meta-factorization. These
/// expose the structure of A⁺; the production pseudoinverse remains
/// kernels::pinv.
namespace metafact::pinv {

/// a = c·r with c the pivot columns of a and r the nonzero rows of rref(a).
struct CrFactors {
  Matrix c;
  Matrix r;
  Index k = 0;
  std::vector<Index> pivots;
};

/// Throws ZeroMatrix when rref finds no pivot.
CrFactors cr_decompose(const Matrix& a, std::optional<double> pivot_tol = std::nullopt);

/// A⁺ = Rᵀ(CᵀARᵀ)⁻¹Cᵀ from the CR decomposition; the k x k middle matrix is
/// inverted through LU. Throws SingularMiddle when it is numerically singular.
Matrix pinv_via_cr(const Matrix& a);

/// MacDuffee: for a full-rank factorization a = b·d, A⁺ = dᵀ(bᵀ·a·dᵀ)⁻¹bᵀ.
/// The product a is formed internally. Throws NotFullRank.
Matrix pinv_macduffee(const Matrix& b, const Matrix& d);

/// F = Hᵀ = A gives the mixing matrix G = A⁺ and A = A·A⁺·A.
core::MetaFactorization pinv_as_meta(const Matrix& a);

}  // namespace metafact::pinv
