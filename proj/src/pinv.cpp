#include "metafact/pinv.hpp"

#include <algorithm>
#include <chrono>
#include <string>

#include "metafact/kernels.hpp"

namespace metafact::pinv {

namespace {

std::string dims(const Matrix& a) {
  return std::to_string(a.rows()) + "x" + std::to_string(a.cols());
}

bool middle_is_singular(const kernels::LuFactors& f) {
  return kernels::lu_min_pivot_ratio(f) <= 64.0 * static_cast<double>(f.u.rows()) * kEps;
}

double idempotency_defect(const Matrix& p) {
  const double scale = frobenius_norm(p);
  return scale == 0.0 ? 0.0 : frobenius_norm(p * p - p) / scale;
}

}  // namespace

CrFactors cr_decompose(const Matrix& a, std::optional<double> pivot_tol) {
  if (a.empty()) throw Error(ErrorKind::InvalidDimension, "empty input");
  require_finite(a);
  const kernels::RrefResult rr = pivot_tol ? kernels::rref(a, *pivot_tol) : kernels::rref_rank_revealing(a);
  if (rr.pivots.empty()) throw Error(ErrorKind::ZeroMatrix, "rref found no pivot; a is zero");
  CrFactors out;
  out.k = rr.pivots.size();
  out.pivots = rr.pivots;
  out.c = a.select_cols(rr.pivots);
  out.r = rr.echelon.block(0, 0, out.k, a.cols());
  return out;
}

Matrix pinv_via_cr(const Matrix& a) {
  const CrFactors cr = cr_decompose(a);
  const Matrix middle = transpose_times(cr.c, times_transpose(a, cr.r));
  const kernels::LuFactors f = kernels::lu(middle);
  if (middle_is_singular(f)) {
    throw Error(ErrorKind::SingularMiddle,
                "CᵀARᵀ is numerically singular (" + std::to_string(cr.k) + "x" + std::to_string(cr.k) +
                    "); the RREF rank is unreliable for this input");
  }
  return transpose_times(cr.r, kernels::lu_solve(f, cr.c.transpose()));
}

Matrix pinv_macduffee(const Matrix& b, const Matrix& d) {
  if (b.empty() || d.empty()) throw Error(ErrorKind::InvalidDimension, "empty factor");
  if (b.cols() != d.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "b is " + dims(b) + " but d is " + dims(d));
  }
  require_finite(b);
  require_finite(d);
  const Index k = b.cols();
  if (kernels::numerical_rank(b) != k || kernels::numerical_rank(d) != k) {
    throw Error(ErrorKind::NotFullRank, "b and d must both have rank " + std::to_string(k));
  }
  const Matrix a = b * d;
  const Matrix middle = transpose_times(b, times_transpose(a, d));
  const kernels::LuFactors f = kernels::lu(middle);
  if (middle_is_singular(f)) throw Error(ErrorKind::NotFullRank, "BᵀADᵀ is numerically singular");
  return transpose_times(d, kernels::lu_solve(f, b.transpose()));
}

core::MetaFactorization pinv_as_meta(const Matrix& a) {
  const auto start = std::chrono::steady_clock::now();
  if (a.empty()) throw Error(ErrorKind::InvalidDimension, "empty input");
  require_finite(a);
  core::MetaFactorization out;
  out.basis = {a, a.transpose()};
  out.g = kernels::pinv(a);
  out.k = kernels::numerical_rank(a);
  // Yᵀ = X = A⁺, so the projectors are A·A⁺ and A⁺·A.
  const Matrix p = a * out.g;
  const Matrix r = out.g * a;
  out.report.idem_defect_p = idempotency_defect(p);
  out.report.idem_defect_r = idempotency_defect(r);
  out.report.rank_p = kernels::numerical_rank(p);
  out.report.rank_r = kernels::numerical_rank(r);
  const double tol = 256.0 * static_cast<double>(std::max(a.rows(), a.cols())) * kEps;
  out.report.within_tolerance = out.report.idem_defect_p <= tol && out.report.idem_defect_r <= tol;
  out.report.residual_rel = core::relative_residual(a, core::reconstruct(a, out.g, out.basis.h));
  out.report.detected_rank = out.k;
  out.report.within_tolerance = out.report.within_tolerance && out.report.residual_rel <= 1e-9;
  out.report.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

}  // namespace metafact::pinv
