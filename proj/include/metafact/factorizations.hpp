#pragma once

#include <string_view>

#include "metafact/core.hpp"
#include "metafact/kernels.hpp"

/// Known factorizations recovered through meta-factorization: the reduced
/// SVD, the CPQR mixing matrix, and a family of UTV decompositions obtained
/// by factoring the mixing matrix of QR-based bases.
namespace metafact::factorizations {

enum class UtvVariant { RowSvd, TwoSidedSvd, TwoSidedQr, TwoSidedLu };

std::string_view variant_name(UtvVariant v) noexcept;

/// a ≈ u·t·vᵀ with t triangular (hard zeros) per `structure`.
///
/// | variant       | u shape | t shape | v shape | orthonormal |
/// |---------------|---------|---------|---------|-------------|
/// | row-svd       | m x k   | k x n   | n x n   | u, v        |
/// | two-sided-svd | m x k   | k x n   | n x n   | v           |
/// | two-sided-qr  | m x k   | k x k   | n x k   | u, v        |
/// | two-sided-lu  | m x k   | k x k   | n x k   | u           |
struct UtvFactors {
  Matrix u;
  Matrix t;
  Matrix v;
  UtvVariant variant = UtvVariant::RowSvd;
  kernels::UpLo structure = kernels::UpLo::Upper;
  double residual_rel = 0.0;

  bool u_orthonormal() const noexcept {
    return variant != UtvVariant::TwoSidedSvd;
  }
  bool v_orthonormal() const noexcept { return variant != UtvVariant::TwoSidedLu; }
  /// True when every entry on the zero side of the diagonal is exactly 0.
  bool t_structurally_triangular() const;
};

/// Bases from the leading k singular vectors; the mixing matrix is
/// diag(σ_1..σ_k).
core::MetaFactorization svd_via_meta(const Matrix& a, Index k);

struct CpqrMixing {
  core::MetaFactorization meta;
  double deviation = 0.0;  ///< ‖g − I_k‖_F
};

/// Bases f = Q(:,1:k), hᵀ = R(1:k,:)·Πᵀ from column-pivoted QR. The mixing
/// matrix comes out as the identity.
CpqrMixing cpqr_mixing(const Matrix& a, Index k);

UtvFactors utv_row_svd(const Matrix& a, Index k);
UtvFactors utv_two_sided_svd(const Matrix& a, Index k);
UtvFactors utv_two_sided_qr(const Matrix& a, Index k);
UtvFactors utv_two_sided_lu(const Matrix& a, Index k);

UtvFactors utv(const Matrix& a, Index k, UtvVariant variant);

}  // namespace metafact::factorizations
