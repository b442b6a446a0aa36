#include "metafact/factorizations.hpp"

#include <string>

namespace metafact::factorizations {

namespace {

void check_rank(const Matrix& a, Index k) {
  if (k == 0) throw Error(ErrorKind::InvalidArgument, "rank must be at least 1");
  if (a.rows() == 0 || a.cols() == 0) throw Error(ErrorKind::InvalidDimension, "empty input");
  const Index rank = kernels::numerical_rank(a);
  if (k > rank) {
    throw Error(ErrorKind::RankTooLarge, "requested rank " + std::to_string(k) +
                                             " exceeds numerical rank " + std::to_string(rank));
  }
}

Matrix leading_cols(const Matrix& q, Index k) { return q.block(0, 0, q.rows(), k); }

// [[vbar, 0], [0, I]] of size n x n.
Matrix block_diag_with_identity(const Matrix& vbar, Index n) {
  Matrix out = Matrix::identity(n);
  for (Index i = 0; i < vbar.rows(); ++i)
    for (Index j = 0; j < vbar.cols(); ++j) out(i, j) = vbar(i, j);
  return out;
}

// [diag(s) | rest], written with hard zeros off the diagonal block.
Matrix diag_then_block(const Vector& s, const Matrix& rest) {
  const Index k = s.size();
  Matrix t(k, k + rest.cols());
  for (Index i = 0; i < k; ++i) t(i, i) = s[i];
  t.set_block(0, k, rest);
  return t;
}

struct TwoSidedBases {
  Matrix qc_k;     // Q_c(:, 1:k)
  Matrix qr_full;  // full Q_r from CPQR of aᵀ
  core::MetaFactorization meta;
};

TwoSidedBases two_sided(const Matrix& a, Index k) {
  check_rank(a, k);
  const kernels::QrFactors qc = kernels::qr(a, true);
  const kernels::QrFactors qr = kernels::qr(a.transpose(), true, true);
  TwoSidedBases out;
  out.qc_k = leading_cols(qc.q, k);
  out.qr_full = qr.q;
  const core::BasisPair basis{out.qc_k, leading_cols(qr.q, k)};
  out.meta = core::meta_factorize(a, basis, {basis.f, basis.h});
  return out;
}

void finish(UtvFactors& f, const Matrix& a) {
  f.residual_rel = core::relative_residual(a, times_transpose(f.u * f.t, f.v));
}

}  // namespace

std::string_view variant_name(UtvVariant v) noexcept {
  switch (v) {
    case UtvVariant::RowSvd: return "row-svd";
    case UtvVariant::TwoSidedSvd: return "two-sided-svd";
    case UtvVariant::TwoSidedQr: return "two-sided-qr";
    case UtvVariant::TwoSidedLu: return "two-sided-lu";
  }
  return "unknown";
}

bool UtvFactors::t_structurally_triangular() const {
  for (Index i = 0; i < t.rows(); ++i) {
    for (Index j = 0; j < t.cols(); ++j) {
      const bool zero_side = structure == kernels::UpLo::Upper ? j < i : j > i;
      if (zero_side && t(i, j) != 0.0) return false;
    }
  }
  return true;
}

core::MetaFactorization svd_via_meta(const Matrix& a, Index k) {
  check_rank(a, k);
  const kernels::SvdFactors s = kernels::svd(a);
  const core::BasisPair basis{leading_cols(s.u, k), leading_cols(s.v, k)};
  return core::meta_factorize(a, basis, {basis.f, basis.h});
}

CpqrMixing cpqr_mixing(const Matrix& a, Index k) {
  check_rank(a, k);
  const kernels::QrFactors q = kernels::qr(a, true);
  // hᵀ = R(1:k,:)·Πᵀ: column perm[j] of hᵀ is column j of R(1:k,:).
  Matrix h(a.cols(), k);
  for (Index j = 0; j < a.cols(); ++j)
    for (Index i = 0; i < k; ++i) h(q.perm[j], i) = q.r(i, j);
  const core::BasisPair basis{leading_cols(q.q, k), std::move(h)};
  CpqrMixing out;
  out.meta = core::meta_factorize(a, basis, {basis.f, basis.h});
  out.deviation = frobenius_norm(out.meta.g - Matrix::identity(k));
  return out;
}

UtvFactors utv_row_svd(const Matrix& a, Index k) {
  check_rank(a, k);
  const Index n = a.cols();
  const kernels::QrFactors qr = kernels::qr(a.transpose(), true, true);
  // With an orthonormal row basis h = Q_r(:,1:k) and anchor d = h, the
  // projector equation gives x = h, so G = a·Q_r(:,1:k).
  const Matrix h = leading_cols(qr.q, k);
  const Matrix g = a * h;
  const kernels::SvdFactors gs = kernels::svd(g);
  const Matrix tail_basis = qr.q.block(0, k, n, n - k);

  UtvFactors out;
  out.variant = UtvVariant::RowSvd;
  out.structure = kernels::UpLo::Upper;
  out.u = gs.u;
  out.t = diag_then_block(gs.s, transpose_times(gs.u, a * tail_basis));
  out.v = qr.q * block_diag_with_identity(gs.v, n);
  finish(out, a);
  return out;
}

UtvFactors utv_two_sided_svd(const Matrix& a, Index k) {
  const TwoSidedBases b = two_sided(a, k);
  const Index n = a.cols();
  const kernels::SvdFactors gs = kernels::svd(b.meta.g);
  const Matrix tail_basis = b.qr_full.block(0, k, n, n - k);
  // Yᵀ = Q_c(:,1:k)ᵀ because the anchor equals the orthonormal basis.
  const Matrix& y = b.qc_k;

  UtvFactors out;
  out.variant = UtvVariant::TwoSidedSvd;
  out.structure = kernels::UpLo::Upper;
  out.u = y * gs.u;
  out.t = diag_then_block(gs.s, transpose_times(gs.u, transpose_times(y, a * tail_basis)));
  out.v = b.qr_full * block_diag_with_identity(gs.v, n);
  finish(out, a);
  return out;
}

UtvFactors utv_two_sided_qr(const Matrix& a, Index k) {
  const TwoSidedBases b = two_sided(a, k);
  const kernels::QrFactors gq = kernels::qr(b.meta.g, true);

  UtvFactors out;
  out.variant = UtvVariant::TwoSidedQr;
  out.structure = kernels::UpLo::Upper;
  out.u = b.qc_k * gq.q;
  out.t = gq.r;
  out.v = leading_cols(b.qr_full, k).select_cols(gq.perm);  // Q_r(:,1:k)·Π̄
  finish(out, a);
  return out;
}

UtvFactors utv_two_sided_lu(const Matrix& a, Index k) {
  const TwoSidedBases b = two_sided(a, k);
  const kernels::LuFactors gl = kernels::lu(b.meta.g);
  if (kernels::lu_min_pivot_ratio(gl) <= 64.0 * static_cast<double>(k) * kEps) {
    throw Error(ErrorKind::RankDeficientAnchor, "mixing matrix is singular; LU has a zero pivot");
  }
  // G = Pᵀ·L·Ũ where row i of P·G is row perm[i] of G; U = Q_c(:,1:k)·Pᵀ
  // therefore has column i equal to column perm[i] of Q_c(:,1:k).
  UtvFactors out;
  out.variant = UtvVariant::TwoSidedLu;
  out.structure = kernels::UpLo::Lower;
  out.u = b.qc_k.select_cols(gl.perm);
  out.t = gl.l;
  out.v = times_transpose(leading_cols(b.qr_full, k), gl.u);
  finish(out, a);
  return out;
}

UtvFactors utv(const Matrix& a, Index k, UtvVariant variant) {
  switch (variant) {
    case UtvVariant::RowSvd: return utv_row_svd(a, k);
    case UtvVariant::TwoSidedSvd: return utv_two_sided_svd(a, k);
    case UtvVariant::TwoSidedQr: return utv_two_sided_qr(a, k);
    case UtvVariant::TwoSidedLu: return utv_two_sided_lu(a, k);
  }
  throw Error(ErrorKind::InvalidArgument, "unknown UTV variant");
}

}  // namespace metafact::factorizations
