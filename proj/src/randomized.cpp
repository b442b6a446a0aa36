#include "metafact/randomized.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>

#include "metafact/kernels.hpp"

namespace metafact::randomized {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void check_indices(const std::vector<Index>& idx, Index bound, const char* what) {
  std::vector<bool> seen(bound, false);
  for (Index i : idx) {
    if (i >= bound) {
      throw Error(ErrorKind::IndexOutOfRange, std::string(what) + " index " + std::to_string(i) +
                                                  " out of range [0, " + std::to_string(bound) + ")");
    }
    if (seen[i]) {
      throw Error(ErrorKind::DuplicateIndex, std::string(what) + " index " + std::to_string(i) + " repeated");
    }
    seen[i] = true;
  }
}

Index count_above(const Vector& s, double threshold) {
  return static_cast<Index>(std::count_if(s.begin(), s.end(), [&](double v) { return v > threshold; }));
}

}  // namespace

void SketchConfig::validate(Index m, Index n) const {
  if (k == 0) throw Error(ErrorKind::InvalidArgument, "sketch rank must be at least 1");
  if (k > n) {
    throw Error(ErrorKind::InvalidArgument,
                "sketch rank " + std::to_string(k) + " exceeds column count " + std::to_string(n));
  }
  if (row_width() > m) {
    throw Error(ErrorKind::InvalidArgument, "row sketch width " + std::to_string(row_width()) +
                                                " exceeds row count " + std::to_string(m));
  }
}

core::SketchPair draw_sketches(Index m, Index n, const SketchConfig& cfg) {
  cfg.validate(m, n);
  Rng rng(cfg.seed);
  core::SketchPair out;
  out.d = rng.gaussian(n, cfg.k);
  out.b = rng.gaussian(m, cfg.row_width());
  return out;
}

core::MetaFactorization generalized_nystrom(const Matrix& a, const SketchConfig& cfg) {
  const auto start = Clock::now();
  if (a.empty()) throw Error(ErrorKind::InvalidDimension, "empty input");
  require_finite(a);
  const core::SketchPair sk = draw_sketches(a.rows(), a.cols(), cfg);
  if (max_abs(a) == 0.0) throw Error(ErrorKind::ZeroMatrix, "cannot sketch the zero matrix");

  const Matrix f = a * sk.d;                  // AΩ_c
  const Matrix h = transpose_times(a, sk.b);  // AᵀΩ_r
  const Matrix ht = h.transpose();            // Ω_rᵀA
  const kernels::QrFactors qr = kernels::qr(transpose_times(sk.b, f));
  double r_max = 0.0;
  double r_min = INFINITY;
  for (Index i = 0; i < cfg.k; ++i) {
    r_max = std::max(r_max, std::abs(qr.r(i, i)));
    r_min = std::min(r_min, std::abs(qr.r(i, i)));
  }
  if (r_min <= 64.0 * static_cast<double>(cfg.row_width()) * kEps * r_max) {
    throw Error(ErrorKind::RankDeficientAnchor,
                "Ω_rᵀAΩ_c has a zero pivot in R (rank of a may be below " + std::to_string(cfg.k) +
                    "); lower the rank or resample with a different seed");
  }
  const Matrix left = kernels::solve_triangular(qr.r, f, kernels::Side::Right, kernels::UpLo::Upper);
  const Matrix g = kernels::solve_triangular(qr.r, qr.q.transpose(), kernels::Side::Left, kernels::UpLo::Upper);

  core::MetaFactorization out;
  out.basis = {f, h};
  out.g = g;
  out.k = cfg.k;
  // Yᵀ = R⁻¹QᵀΩ_rᵀ and X = Ω_c·R⁻¹Qᵀ solve the projector equation.
  const core::ProjectorPair pair{times_transpose(sk.b, g), sk.d * g, cfg.k, cfg.oversample() > 0};
  out.report = core::verify_idempotent(pair, out.basis, core::projector_tolerance(out.basis));
  out.report.residual_rel = core::relative_residual(a, left * transpose_times(qr.q, ht));
  out.report.detected_rank = kernels::numerical_rank(g);
  out.report.elapsed_seconds = seconds_since(start);
  return out;
}

Matrix nystrom_unstable(const Matrix& a, const SketchConfig& cfg) {
  if (a.empty()) throw Error(ErrorKind::InvalidDimension, "empty input");
  require_finite(a);
  const core::SketchPair sk = draw_sketches(a.rows(), a.cols(), cfg);
  const Matrix f = a * sk.d;
  const Matrix ht = transpose_times(sk.b, a);
  return (f * kernels::pinv(ht * sk.d)) * ht;
}

std::string_view mode_name(CurMode mode) noexcept {
  return mode == CurMode::Orthogonal ? "orthogonal" : "interpolative";
}

CurFactors cur(const Matrix& a, const std::vector<Index>& row_idx, const std::vector<Index>& col_idx,
               CurMode mode) {
  if (a.empty()) throw Error(ErrorKind::InvalidDimension, "empty input");
  require_finite(a);
  check_indices(row_idx, a.rows(), "row");
  check_indices(col_idx, a.cols(), "column");
  if (row_idx.size() != col_idx.size() || row_idx.empty()) {
    throw Error(ErrorKind::InvalidArgument, "need equally many rows and columns, got " +
                                                std::to_string(row_idx.size()) + " and " +
                                                std::to_string(col_idx.size()));
  }
  CurFactors out;
  out.c = a.select_cols(col_idx);
  out.r = a.select_rows(row_idx);
  out.row_idx = row_idx;
  out.col_idx = col_idx;
  out.mode = mode;
  if (mode == CurMode::Orthogonal) {
    // (CᵀC)⁺Cᵀ = C⁺ and Rᵀ(RRᵀ)⁺ = R⁺, evaluated without forming the Gram matrices.
    out.u_mix = kernels::pinv(out.c) * (a * kernels::pinv(out.r));
  } else {
    const Matrix btc = out.c.select_rows(row_idx);   // A(I,J)
    const Matrix rd = out.r.select_cols(col_idx);    // A(I,J)
    const Matrix btad = a.select_rows(row_idx).select_cols(col_idx);
    out.u_mix = kernels::pinv(btc) * btad * kernels::pinv(rd);
  }
  return out;
}

CurFactors cur_random_naive(const Matrix& a, Index k, std::uint64_t seed, CurMode mode) {
  if (k == 0 || k > std::min(a.rows(), a.cols())) {
    throw Error(ErrorKind::InvalidArgument,
                "rank " + std::to_string(k) + " must be in [1, min(m,n)] for a " + std::to_string(a.rows()) +
                    "x" + std::to_string(a.cols()) + " matrix");
  }
  Rng rng(seed);
  const std::vector<Index> rows = rng.sample_without_replacement(a.rows(), k);
  const std::vector<Index> cols = rng.sample_without_replacement(a.cols(), k);
  return cur(a, rows, cols, mode);
}

double default_pivot_tol(const Matrix& a) {
  return 64.0 * static_cast<double>(std::max(a.rows(), a.cols())) * kEps * max_abs(a);
}

WedderburnResult wedderburn_reduce(const Matrix& a, Index max_steps, std::optional<double> pivot_tol,
                                   const DirectionHook& hook) {
  const auto start = Clock::now();
  if (a.empty()) throw Error(ErrorKind::InvalidDimension, "empty input");
  if (max_steps == 0) throw Error(ErrorKind::InvalidArgument, "max_steps must be at least 1");
  require_finite(a);
  const Index m = a.rows();
  const Index n = a.cols();
  const double tol = pivot_tol.value_or(default_pivot_tol(a));
  if (tol < 0.0 || !std::isfinite(tol)) throw Error(ErrorKind::InvalidArgument, "pivot_tol must be finite and >= 0");

  WedderburnResult out;
  Matrix ar = a;
  std::vector<Vector> f_cols;
  std::vector<Vector> h_cols;
  for (Index step = 0; step < max_steps && max_abs(ar) > tol; ++step) {
    WedderburnStep s;
    if (hook) {
      auto [u, v] = hook(ar, step);
      if (u.size() != n || v.size() != m) {
        throw Error(ErrorKind::DimensionMismatch, "direction hook returned vectors of the wrong length");
      }
      s.u_r = std::move(u);
      s.v_r = std::move(v);
    } else {
      Index pi = 0;
      Index pj = 0;
      double best = -1.0;
      for (Index i = 0; i < m; ++i) {
        for (Index j = 0; j < n; ++j) {
          if (std::abs(ar(i, j)) > best) {
            best = std::abs(ar(i, j));
            pi = i;
            pj = j;
          }
        }
      }
      s.u_r.assign(n, 0.0);
      s.v_r.assign(m, 0.0);
      s.u_r[pj] = 1.0;
      s.v_r[pi] = 1.0;
      s.pivot = std::make_pair(pi, pj);
    }
    const Vector au = ar * std::span<const double>(s.u_r);
    const Vector atv = ar.transpose() * std::span<const double>(s.v_r);
    double g = 0.0;
    for (Index i = 0; i < m; ++i) g += s.v_r[i] * au[i];
    if (!(std::abs(g) > tol)) {
      throw Error(ErrorKind::PivotBreakdown, "step " + std::to_string(step) + ": |vᵀA_r u| = " +
                                                 std::to_string(std::abs(g)) + " is not above the pivot tolerance");
    }
    s.g_r = g;
    for (Index i = 0; i < m; ++i)
      for (Index j = 0; j < n; ++j) ar(i, j) -= au[i] * atv[j] / g;
    if (s.pivot) {
      // Complete-pivoting elimination clears the pivot row and column exactly.
      for (Index j = 0; j < n; ++j) ar(s.pivot->first, j) = 0.0;
      for (Index i = 0; i < m; ++i) ar(i, s.pivot->second) = 0.0;
    }
    f_cols.push_back(au);
    h_cols.push_back(atv);
    out.steps.push_back(std::move(s));
  }

  const Index k = out.steps.size();
  Matrix f(m, k);
  Matrix h(n, k);
  Matrix g(k, k);
  for (Index r = 0; r < k; ++r) {
    f.set_col(r, f_cols[r]);
    h.set_col(r, h_cols[r]);
    g(r, r) = 1.0 / out.steps[r].g_r;
  }
  out.meta.basis = {f, h};
  out.meta.g = g;
  out.meta.k = k;
  out.meta.report.residual_rel = core::relative_residual(a, core::reconstruct(f, g, h));
  out.meta.report.detected_rank = k;
  out.meta.report.rank_p = k;
  out.meta.report.rank_r = k;
  out.meta.report.within_tolerance = max_abs(ar) <= tol;
  out.meta.report.elapsed_seconds = seconds_since(start);
  out.remainder = std::move(ar);
  return out;
}

RankReductionReport verify_rank_reduction_conditions(const Matrix& a, const Matrix& f, const Matrix& g,
                                                     const Matrix& h) {
  const Index m = a.rows();
  const Index n = a.cols();
  if (a.empty() || f.rows() != m || h.rows() != n || g.rows() != f.cols() || g.cols() != h.cols() ||
      g.rows() != g.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "factors do not conform to a and a square mixing matrix");
  }
  const Index k = g.rows();
  const kernels::LuFactors glu = kernels::lu(g);
  if (kernels::lu_min_pivot_ratio(glu) <= 64.0 * static_cast<double>(k) * kEps) {
    throw Error(ErrorKind::SingularMixing, "mixing matrix is numerically singular");
  }
  const Matrix g_inv = kernels::lu_solve(glu, Matrix::identity(k));

  RankReductionReport rep;
  const Matrix a_pinv = kernels::pinv(a);
  const Matrix omega_c = a_pinv * f;
  const Matrix omega_r = transpose_times(a_pinv, h);  // (Aᵀ)⁺ = (A⁺)ᵀ
  auto rel = [](const Matrix& x, const Matrix& ref) {
    const double scale = frobenius_norm(ref);
    return frobenius_norm(x - ref) / (scale == 0.0 ? 1.0 : scale);
  };
  rep.f_defect = rel(a * omega_c, f);
  rep.h_defect = rel(transpose_times(a, omega_r), h);
  rep.g_defect = rel(transpose_times(omega_r, a * omega_c), g_inv);

  const Vector sa = kernels::singular_values(a);
  const double threshold = rep.tolerance * (sa.empty() ? 0.0 : sa[0]);
  const Matrix fgh = core::reconstruct(f, g, h);
  rep.rank_a = count_above(sa, threshold);
  rep.rank_fgh = count_above(kernels::singular_values(fgh), threshold);
  rep.rank_residual = count_above(kernels::singular_values(a - fgh), threshold);
  rep.rank_identity = rep.rank_fgh <= rep.rank_a && rep.rank_residual == rep.rank_a - rep.rank_fgh;
  rep.holds = rep.f_defect <= rep.tolerance && rep.h_defect <= rep.tolerance &&
              rep.g_defect <= rep.tolerance && rep.rank_identity;
  return rep;
}

}  // namespace metafact::randomized
