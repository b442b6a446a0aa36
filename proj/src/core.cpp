#include "metafact/core.hpp"

#include <algorithm>
#include <chrono>
#include <string>

#include "metafact/kernels.hpp"

namespace metafact::core {

namespace {

using kernels::Side;
using kernels::UpLo;

std::string dims(const Matrix& a) {
  return std::to_string(a.rows()) + "x" + std::to_string(a.cols());
}

void check_basis(const BasisPair& basis) {
  if (basis.f.cols() != basis.h.cols()) {
    throw Error(ErrorKind::DimensionMismatch,
                "basis widths differ: f is " + dims(basis.f) + ", h is " + dims(basis.h));
  }
  if (basis.f.cols() == 0) throw Error(ErrorKind::InvalidDimension, "basis has zero columns");
}

// Frobenius norm of the idempotency defect of P = u·wᵀ and of P itself,
// evaluated in the k-dimensional compressed coordinates u = Q_u R_u,
// w = Q_w R_w: P = Q_u M Q_wᵀ with M = R_u R_wᵀ, so
// ‖P² − P‖_F = ‖M (Q_wᵀ Q_u) M − M‖_F and rank(P) = rank(M).
struct ProjectorDefect {
  double defect_rel = 0.0;
  Index rank = 0;
};

ProjectorDefect projector_defect(const Matrix& u, const Matrix& w) {
  const kernels::QrFactors qu = kernels::qr(u);
  const kernels::QrFactors qw = kernels::qr(w);
  const Matrix core = times_transpose(qu.r, qw.r);
  const Matrix cross = transpose_times(qw.q, qu.q);
  const double norm_p = frobenius_norm(core);
  ProjectorDefect out;
  if (norm_p == 0.0) return out;
  out.defect_rel = frobenius_norm(core * cross * core - core) / norm_p;
  // Rank cutoff uses the ambient dimension, as an SVD of P itself would.
  const Vector s = kernels::singular_values(core);
  out.rank = kernels::numerical_rank(s, u.rows(), u.rows());
  return out;
}

}  // namespace

double relative_residual(const Matrix& a, const Matrix& approx) {
  const double na = frobenius_norm(a);
  const double diff = frobenius_norm(a - approx);
  if (na == 0.0) return diff;
  return diff / na;
}

double projector_tolerance(const BasisPair& basis) {
  return 256.0 * static_cast<double>(std::max(basis.rows(), basis.cols())) * kEps *
         (frobenius_norm(basis.f) + frobenius_norm(basis.h));
}

Matrix column_projector(const BasisPair& basis, const ProjectorPair& pair) {
  return times_transpose(basis.f, pair.y);
}

Matrix row_projector(const BasisPair& basis, const ProjectorPair& pair) {
  return times_transpose(pair.x, basis.h);
}

ProjectorPair solve_projector_equation(const BasisPair& basis, const SketchPair& sketch) {
  check_basis(basis);
  const Matrix& f = basis.f;
  const Matrix& h = basis.h;
  const Matrix& b = sketch.b;
  const Matrix& d = sketch.d;
  if (b.rows() != f.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "left anchor " + dims(b) + " vs basis f " + dims(f));
  }
  if (d.rows() != h.rows()) {
    throw Error(ErrorKind::DimensionMismatch, "right anchor " + dims(d) + " vs basis h " + dims(h));
  }
  const Index k = f.cols();
  const Matrix btf = transpose_times(b, f);  // p x k
  const Matrix htd = transpose_times(h, d);  // k x q
  if (btf.rows() < k || kernels::numerical_rank(btf) < k) {
    throw Error(ErrorKind::RankDeficientAnchor, "rank(bᵀf) < " + std::to_string(k));
  }
  if (htd.cols() < k || kernels::numerical_rank(htd) < k) {
    throw Error(ErrorKind::RankDeficientAnchor, "rank(hᵀd) < " + std::to_string(k));
  }

  ProjectorPair out;
  out.k = k;
  try {
    if (b == f) {
      // (fᵀf)⁻¹fᵀ = R_f⁻¹Q_fᵀ; forming fᵀf would square cond(f).
      const kernels::QrFactors ff = kernels::qr(f);
      out.y = kernels::solve_triangular(ff.r, ff.q.transpose(), Side::Left, UpLo::Upper).transpose();
    } else if (btf.rows() == k) {
      const kernels::QrFactors fy = kernels::qr(btf);
      const Matrix qt_bt = times_transpose(fy.q.transpose(), b);  // QYᵀ·bᵀ
      out.y = kernels::solve_triangular(fy.r, qt_bt, Side::Left, UpLo::Upper).transpose();
    } else {
      out.y = times_transpose(b, kernels::pinv(btf));
      out.oblique = true;
    }
    if (d == h) {
      const kernels::QrFactors fh = kernels::qr(h);
      out.x = kernels::solve_triangular(fh.r.transpose(), fh.q, Side::Right, UpLo::Lower);
    } else if (htd.rows() == htd.cols()) {
      const kernels::QrFactors fx = kernels::qr(htd);
      const Matrix d_over_r = kernels::solve_triangular(fx.r, d, Side::Right, UpLo::Upper);
      out.x = times_transpose(d_over_r, fx.q);
    } else {
      out.x = d * kernels::pinv(htd);
      out.oblique = true;
    }
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::SingularTriangular) {
      throw Error(ErrorKind::RankDeficientAnchor, std::string("anchor product is singular: ") + e.what());
    }
    throw;
  }
  return out;
}

FactorReport verify_idempotent(const ProjectorPair& pair, const BasisPair& basis, double tol) {
  // The two sides may differ in width (oversampled row sketches).
  if (basis.f.cols() == 0 || basis.h.cols() == 0) {
    throw Error(ErrorKind::InvalidDimension, "basis has zero columns");
  }
  if (pair.y.rows() != basis.f.rows() || pair.y.cols() != basis.f.cols() ||
      pair.x.rows() != basis.h.rows() || pair.x.cols() != basis.h.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "projector pair does not conform to the basis");
  }
  const ProjectorDefect p = projector_defect(basis.f, pair.y);
  const ProjectorDefect r = projector_defect(pair.x, basis.h);
  FactorReport report;
  report.idem_defect_p = p.defect_rel;
  report.idem_defect_r = r.defect_rel;
  report.rank_p = p.rank;
  report.rank_r = r.rank;
  report.detected_rank = std::min(p.rank, r.rank);
  report.within_tolerance = p.defect_rel <= tol && r.defect_rel <= tol;
  return report;
}

Matrix mixing_matrix(const Matrix& a, const ProjectorPair& pair) {
  if (pair.y.rows() != a.rows() || pair.x.rows() != a.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "projector pair does not conform to a " + dims(a));
  }
  if (a.rows() >= a.cols()) return transpose_times(pair.y, a) * pair.x;
  return transpose_times(pair.y, a * pair.x);
}

Matrix reconstruct(const Matrix& f, const Matrix& g, const Matrix& h) {
  if (f.cols() != g.rows() || h.cols() != g.cols()) {
    throw Error(ErrorKind::DimensionMismatch,
                "cannot reconstruct from f " + dims(f) + ", g " + dims(g) + ", h " + dims(h));
  }
  return times_transpose(f * g, h);
}

MetaFactorization meta_factorize(const Matrix& a, const BasisPair& basis, const SketchPair& sketch) {
  const auto start = std::chrono::steady_clock::now();
  if (basis.f.rows() != a.rows() || basis.h.rows() != a.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "basis does not conform to a " + dims(a));
  }
  const ProjectorPair pair = solve_projector_equation(basis, sketch);
  MetaFactorization out;
  out.basis = basis;
  out.g = mixing_matrix(a, pair);
  out.k = pair.k;
  out.report = verify_idempotent(pair, basis, projector_tolerance(basis));
  out.report.residual_rel = relative_residual(a, reconstruct(basis.f, out.g, basis.h));
  out.report.detected_rank = kernels::numerical_rank(out.g);
  out.report.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

Matrix penrose_general_solution(const Matrix& a, const BasisPair& basis, const SketchPair& sketch,
                                const Matrix& w) {
  if (basis.f.rows() != a.rows() || basis.h.rows() != a.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "basis does not conform to a " + dims(a));
  }
  const ProjectorPair pair = solve_projector_equation(basis, sketch);
  if (w.rows() != pair.k || w.cols() != pair.k) {
    throw Error(ErrorKind::DimensionMismatch, "w must be " + std::to_string(pair.k) + "x" +
                                                  std::to_string(pair.k) + ", got " + dims(w));
  }
  const Matrix ytf = transpose_times(pair.y, basis.f);
  const Matrix htx = transpose_times(basis.h, pair.x);
  return mixing_matrix(a, pair) + w - ytf * w * htx;
}

Vector solve_vector_equation(const Matrix& a, std::span<const double> c, const Matrix& b_anchor,
                             std::span<const double> y_free) {
  const Index m = a.rows();
  const Index n = a.cols();
  if (c.size() != m || y_free.size() != n || b_anchor.rows() != m) {
    throw Error(ErrorKind::DimensionMismatch, "vector equation operands do not conform to a " + dims(a));
  }
  const kernels::SvdFactors sa = kernels::svd(a);
  const Index rank = kernels::numerical_rank(sa.s, m, n);

  // Distance of c from the column space, measured against the leading left
  // singular vectors.
  Vector residual(c.begin(), c.end());
  for (Index j = 0; j < rank; ++j) {
    double proj = 0.0;
    for (Index i = 0; i < m; ++i) proj += sa.u(i, j) * c[i];
    for (Index i = 0; i < m; ++i) residual[i] -= proj * sa.u(i, j);
  }
  const double tol = 256.0 * static_cast<double>(std::max(m, n)) * kEps;
  if (norm2(residual) > tol * norm2(c)) {
    throw Error(ErrorKind::InconsistentSystem, "right-hand side is not in the column space of a");
  }

  const Matrix bta = transpose_times(b_anchor, a);
  if (kernels::numerical_rank(bta) != rank) {
    throw Error(ErrorKind::RankDeficientAnchor, "rank(bᵀa) differs from rank(a)");
  }
  const Matrix yt = kernels::pinv(bta) * b_anchor.transpose();  // n x m
  const Vector yc = yt * c;
  const Vector ay = a * y_free;
  const Vector yay = yt * std::span<const double>(ay);
  Vector x(n);
  for (Index i = 0; i < n; ++i) x[i] = yc[i] + y_free[i] - yay[i];
  return x;
}

}  // namespace metafact::core
