#include "metafact/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace metafact::kernels {

namespace {

void require_nonempty(const Matrix& a, const char* what) {
  if (a.rows() == 0 || a.cols() == 0) {
    throw Error(ErrorKind::InvalidDimension, std::string(what) + " needs a non-empty matrix");
  }
}

// Householder reflector H = I - tau v vᵀ with v(0) = 1 mapping x to beta e1.
// tau = 0 when the tail of x is already zero (H = I), as in LAPACK's dlarfg.
struct Reflector {
  Vector v;
  double tau = 0.0;
  double beta = 0.0;
};

Reflector make_reflector(std::span<const double> x) {
  Reflector h;
  h.v.assign(x.begin(), x.end());
  const double alpha = x[0];
  const double tail = norm2(x.subspan(1));
  if (tail == 0.0) {
    h.beta = alpha;
    h.v.assign(x.size(), 0.0);
    h.v[0] = 1.0;
    return h;
  }
  const double norm = std::hypot(alpha, tail);
  h.beta = alpha >= 0.0 ? -norm : norm;
  h.tau = (h.beta - alpha) / h.beta;
  const double scale = 1.0 / (alpha - h.beta);
  for (Index i = 1; i < h.v.size(); ++i) h.v[i] *= scale;
  h.v[0] = 1.0;
  return h;
}

// Applies H from the left to rows [row0, row0 + v.size()) of columns [col0, cols).
void apply_reflector_left(const Reflector& h, Matrix& w, Index row0, Index col0) {
  if (h.tau == 0.0) return;
  const Index len = h.v.size();
  for (Index j = col0; j < w.cols(); ++j) {
    double dot = 0.0;
    for (Index i = 0; i < len; ++i) dot += h.v[i] * w(row0 + i, j);
    if (dot == 0.0) continue;
    dot *= h.tau;
    for (Index i = 0; i < len; ++i) w(row0 + i, j) -= dot * h.v[i];
  }
}

double column_tail_norm(const Matrix& w, Index j, Index row0) {
  Vector tmp(w.rows() - row0);
  for (Index i = row0; i < w.rows(); ++i) tmp[i - row0] = w(i, j);
  return norm2(tmp);
}

void swap_columns(Matrix& w, Index a, Index b) {
  if (a == b) return;
  for (Index i = 0; i < w.rows(); ++i) std::swap(w(i, a), w(i, b));
}

void swap_rows(Matrix& w, Index a, Index b) {
  if (a == b) return;
  for (Index j = 0; j < w.cols(); ++j) std::swap(w(a, j), w(b, j));
}

double dot(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (Index i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

// Index of the first entry that is not rounding noise relative to the largest.
Index leading_index(std::span<const double> x) {
  double big = 0.0;
  for (double v : x) big = std::max(big, std::abs(v));
  for (Index i = 0; i < x.size(); ++i) {
    if (std::abs(x[i]) > 64.0 * kEps * big) return i;
  }
  return 0;
}

// One-sided Jacobi on the columns of a tall (m >= n) matrix.
SvdFactors jacobi_svd_tall(const Matrix& a) {
  const Index m = a.rows();
  const Index n = a.cols();
  std::vector<Vector> cols(n);
  std::vector<Vector> vcols(n, Vector(n, 0.0));
  for (Index j = 0; j < n; ++j) {
    cols[j] = a.col(j);
    vcols[j][j] = 1.0;
  }

  const double tol = static_cast<double>(m) * kEps;
  constexpr int kMaxSweeps = 100;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool rotated = false;
    for (Index p = 0; p + 1 < n; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        const double alpha = dot(cols[p], cols[p]);
        const double beta = dot(cols[q], cols[q]);
        const double gamma = dot(cols[p], cols[q]);
        if (alpha == 0.0 || beta == 0.0) continue;
        if (std::abs(gamma) <= tol * std::sqrt(alpha) * std::sqrt(beta)) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::hypot(1.0, zeta));
        const double c = 1.0 / std::hypot(1.0, t);
        const double s = c * t;
        for (Index i = 0; i < m; ++i) {
          const double xp = cols[p][i];
          const double xq = cols[q][i];
          cols[p][i] = c * xp - s * xq;
          cols[q][i] = s * xp + c * xq;
        }
        for (Index i = 0; i < n; ++i) {
          const double xp = vcols[p][i];
          const double xq = vcols[q][i];
          vcols[p][i] = c * xp - s * xq;
          vcols[q][i] = s * xp + c * xq;
        }
      }
    }
    if (!rotated) break;
  }

  Vector norms(n);
  for (Index j = 0; j < n; ++j) norms[j] = norm2(cols[j]);
  std::vector<Index> order(n);
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Index x, Index y) { return norms[x] > norms[y]; });

  SvdFactors out{Matrix(m, n), Vector(n), Matrix(n, n)};
  std::vector<Vector> ucols;
  std::vector<Index> missing;
  ucols.reserve(n);
  constexpr double kTiny = 1e-290;
  for (Index r = 0; r < n; ++r) {
    const Index j = order[r];
    out.s[r] = norms[j];
    out.v.set_col(r, vcols[j]);
    Vector u = cols[j];
    if (norms[j] > kTiny) {
      for (double& x : u) x /= norms[j];
    } else {
      out.s[r] = 0.0;
      missing.push_back(r);
    }
    ucols.push_back(std::move(u));
  }

  // Complete left vectors of zero singular values by Gram-Schmidt on e_i.
  Index next_e = 0;
  for (Index r : missing) {
    for (; next_e < m; ++next_e) {
      Vector cand(m, 0.0);
      cand[next_e] = 1.0;
      for (int pass = 0; pass < 2; ++pass) {
        for (Index o = 0; o < n; ++o) {
          if (o == r) continue;
          if (std::find(missing.begin(), missing.end(), o) != missing.end() && o > r) continue;
          const double proj = dot(ucols[o], cand);
          for (Index i = 0; i < m; ++i) cand[i] -= proj * ucols[o][i];
        }
      }
      const double nc = norm2(cand);
      if (nc > 0.5) {
        for (double& x : cand) x /= nc;
        ucols[r] = std::move(cand);
        ++next_e;
        break;
      }
    }
  }
  for (Index r = 0; r < n; ++r) out.u.set_col(r, ucols[r]);
  return out;
}

}  // namespace

Matrix QrFactors::perm_matrix() const {
  Matrix p(perm.size(), perm.size());
  for (Index j = 0; j < perm.size(); ++j) p(perm[j], j) = 1.0;
  return p;
}

QrFactors qr(const Matrix& a, bool pivot, bool full) {
  require_nonempty(a, "qr");
  require_finite(a);
  const Index m = a.rows();
  const Index n = a.cols();
  const Index p = std::min(m, n);

  Matrix w = a;
  Permutation perm(n);
  std::iota(perm.begin(), perm.end(), Index{0});
  std::vector<Reflector> reflectors;
  reflectors.reserve(p);

  for (Index j = 0; j < p; ++j) {
    if (pivot) {
      Index best = j;
      double best_norm = column_tail_norm(w, j, j);
      for (Index c = j + 1; c < n; ++c) {
        const double nc = column_tail_norm(w, c, j);
        if (nc > best_norm) {
          best_norm = nc;
          best = c;
        }
      }
      swap_columns(w, j, best);
      std::swap(perm[j], perm[best]);
    }
    Vector x(m - j);
    for (Index i = j; i < m; ++i) x[i - j] = w(i, j);
    Reflector h = make_reflector(x);
    apply_reflector_left(h, w, j, j + 1);
    w(j, j) = h.beta;
    for (Index i = j + 1; i < m; ++i) w(i, j) = 0.0;
    reflectors.push_back(std::move(h));
  }

  const Index qcols = full ? m : p;
  Matrix q = Matrix::eye(m, qcols);
  for (Index j = p; j-- > 0;) apply_reflector_left(reflectors[j], q, j, 0);

  const Index rrows = full ? m : p;
  Matrix r(rrows, n);
  for (Index i = 0; i < std::min(rrows, m); ++i)
    for (Index c = i; c < n; ++c) r(i, c) = w(i, c);

  for (Index i = 0; i < p; ++i) {
    if (r(i, i) < 0.0) {
      for (Index c = i; c < n; ++c) r(i, c) = -r(i, c);
      for (Index k = 0; k < m; ++k) q(k, i) = -q(k, i);
    }
  }
  return {std::move(q), std::move(r), std::move(perm)};
}

SvdFactors svd(const Matrix& a) {
  require_nonempty(a, "svd");
  require_finite(a);
  SvdFactors out;
  if (a.rows() >= a.cols()) {
    out = jacobi_svd_tall(a);
  } else {
    SvdFactors t = jacobi_svd_tall(a.transpose());
    out = {std::move(t.v), std::move(t.s), std::move(t.u)};
  }
  for (Index j = 0; j < out.s.size(); ++j) {
    const Vector uj = out.u.col(j);
    if (uj[leading_index(uj)] < 0.0) {
      for (Index i = 0; i < out.u.rows(); ++i) out.u(i, j) = -out.u(i, j);
      for (Index i = 0; i < out.v.rows(); ++i) out.v(i, j) = -out.v(i, j);
    }
  }
  return out;
}

Vector singular_values(const Matrix& a) { return svd(a).s; }

Index numerical_rank(const Vector& s, Index m, Index n, std::optional<double> rtol) {
  if (s.empty() || s.front() == 0.0) return 0;
  const double tol = rtol.value_or(static_cast<double>(std::max(m, n)) * kEps) * s.front();
  return static_cast<Index>(std::count_if(s.begin(), s.end(), [&](double v) { return v > tol; }));
}

Index numerical_rank(const Matrix& a, std::optional<double> rtol) {
  if (a.rows() == 0 || a.cols() == 0) return 0;
  return numerical_rank(singular_values(a), a.rows(), a.cols(), rtol);
}

LuFactors lu(const Matrix& a) {
  if (a.rows() != a.cols()) {
    throw Error(ErrorKind::NotSquare, "lu needs a square matrix, got " + std::to_string(a.rows()) +
                                          "x" + std::to_string(a.cols()));
  }
  require_finite(a);
  const Index k = a.rows();
  Matrix w = a;
  Permutation perm(k);
  std::iota(perm.begin(), perm.end(), Index{0});
  for (Index j = 0; j < k; ++j) {
    Index piv = j;
    for (Index i = j + 1; i < k; ++i) {
      if (std::abs(w(i, j)) > std::abs(w(piv, j))) piv = i;
    }
    swap_rows(w, j, piv);
    std::swap(perm[j], perm[piv]);
    const double d = w(j, j);
    if (d == 0.0) continue;
    for (Index i = j + 1; i < k; ++i) {
      const double l = w(i, j) / d;
      w(i, j) = l;
      if (l == 0.0) continue;
      for (Index c = j + 1; c < k; ++c) w(i, c) -= l * w(j, c);
    }
  }
  LuFactors out{Matrix::identity(k), Matrix(k, k), std::move(perm)};
  for (Index i = 0; i < k; ++i) {
    for (Index c = 0; c < i; ++c) out.l(i, c) = w(i, c);
    for (Index c = i; c < k; ++c) out.u(i, c) = w(i, c);
  }
  return out;
}

double lu_min_pivot_ratio(const LuFactors& f) {
  const double big = max_abs(f.u);
  if (big == 0.0) return 0.0;
  double smallest = big;
  for (Index i = 0; i < f.u.rows(); ++i) smallest = std::min(smallest, std::abs(f.u(i, i)));
  return smallest / big;
}

Matrix lu_solve(const LuFactors& f, const Matrix& b) {
  if (b.rows() != f.l.rows()) throw Error(ErrorKind::DimensionMismatch, "lu_solve: row mismatch");
  Matrix pb = b.select_rows(f.perm);
  Matrix y = solve_triangular(f.l, pb, Side::Left, UpLo::Lower);
  return solve_triangular(f.u, y, Side::Left, UpLo::Upper);
}

Matrix pinv(const Matrix& a, std::optional<double> rtol) {
  require_finite(a);
  if (a.rows() == 0 || a.cols() == 0) return Matrix(a.cols(), a.rows());
  const double tol_rel = rtol.value_or(static_cast<double>(std::max(a.rows(), a.cols())) * kEps);
  if (tol_rel < 0.0) throw Error(ErrorKind::InvalidArgument, "pinv: rtol must be non-negative");
  const SvdFactors f = svd(a);
  const double cutoff = f.s.empty() ? 0.0 : tol_rel * f.s.front();
  // v * diag(s+) * uᵀ, skipping discarded singular triplets.
  Matrix vs = f.v;
  for (Index j = 0; j < f.s.size(); ++j) {
    const double inv = f.s[j] > cutoff && f.s[j] > 0.0 ? 1.0 / f.s[j] : 0.0;
    for (Index i = 0; i < vs.rows(); ++i) vs(i, j) *= inv;
  }
  return times_transpose(vs, f.u);
}

namespace {

// err, when present, holds a bound on the rounding error in each entry of w.
RrefResult gauss_jordan(const Matrix& a, double tol, bool track) {
  const Index m = a.rows();
  const Index n = a.cols();
  Matrix w = a;
  Matrix err = track ? Matrix(m, n) : Matrix();
  const auto is_noise = [&](Index i, Index c) {
    return std::abs(w(i, c)) <= tol || (track && std::abs(w(i, c)) <= 32.0 * err(i, c));
  };
  RrefResult out;
  Index r = 0;
  for (Index j = 0; j < n && r < m; ++j) {
    Index piv = r;
    for (Index i = r + 1; i < m; ++i) {
      if (std::abs(w(i, j)) > std::abs(w(piv, j))) piv = i;
    }
    bool all_noise = true;
    for (Index i = r; i < m && all_noise; ++i) all_noise = is_noise(i, j);
    if (all_noise) {
      for (Index i = r; i < m; ++i) w(i, j) = 0.0;
      continue;
    }
    swap_rows(w, r, piv);
    if (track) swap_rows(err, r, piv);
    const double d = w(r, j);
    const double d_err = track ? err(r, j) : 0.0;
    for (Index c = j + 1; c < n; ++c) {
      w(r, c) /= d;
      if (track) err(r, c) = (err(r, c) + std::abs(w(r, c)) * d_err) / std::abs(d) + kEps * std::abs(w(r, c));
    }
    w(r, j) = 1.0;
    if (track) err(r, j) = 0.0;
    for (Index i = 0; i < m; ++i) {
      if (i == r) continue;
      const double factor = w(i, j);
      if (factor == 0.0) continue;
      for (Index c = j + 1; c < n; ++c) {
        const double term = factor * w(r, c);
        w(i, c) -= term;
        if (track) {
          err(i, c) += std::abs(factor) * err(r, c) + err(i, j) * std::abs(w(r, c)) +
                       kEps * (std::abs(w(i, c)) + std::abs(term));
        }
      }
      w(i, j) = 0.0;
      if (track) err(i, j) = 0.0;
    }
    out.pivots.push_back(j);
    ++r;
  }
  for (Index i = 0; i < m; ++i) {
    for (Index c = 0; c < n; ++c) {
      if (is_noise(i, c)) w(i, c) = 0.0;
    }
  }
  out.echelon = std::move(w);
  return out;
}

double default_rref_tol(const Matrix& a) {
  return static_cast<double>(std::max(a.rows(), a.cols())) * kEps * max_abs(a);
}

}  // namespace

RrefResult rref(const Matrix& a, std::optional<double> pivot_tol) {
  require_finite(a);
  const double tol = pivot_tol.value_or(default_rref_tol(a));
  if (tol < 0.0) throw Error(ErrorKind::InvalidArgument, "rref: pivot_tol must be non-negative");
  return gauss_jordan(a, tol, false);
}

RrefResult rref_rank_revealing(const Matrix& a) {
  require_finite(a);
  return gauss_jordan(a, default_rref_tol(a), true);
}

Matrix solve_triangular(const Matrix& r, const Matrix& b, Side side, UpLo uplo) {
  if (r.rows() != r.cols()) throw Error(ErrorKind::NotSquare, "solve_triangular: r must be square");
  if (side == Side::Right) {
    const UpLo flipped = uplo == UpLo::Upper ? UpLo::Lower : UpLo::Upper;
    return solve_triangular(r.transpose(), b.transpose(), Side::Left, flipped).transpose();
  }
  const Index n = r.rows();
  if (b.rows() != n) {
    throw Error(ErrorKind::DimensionMismatch, "solve_triangular: b has " +
                                                  std::to_string(b.rows()) + " rows, expected " +
                                                  std::to_string(n));
  }
  double big = 0.0;
  for (Index i = 0; i < n; ++i) {
    const Index lo = uplo == UpLo::Upper ? i : 0;
    const Index hi = uplo == UpLo::Upper ? n : i + 1;
    for (Index c = lo; c < hi; ++c) big = std::max(big, std::abs(r(i, c)));
  }
  for (Index i = 0; i < n; ++i) {
    if (std::abs(r(i, i)) <= kEps * big || r(i, i) == 0.0) {
      throw Error(ErrorKind::SingularTriangular,
                  "diagonal entry " + std::to_string(i) + " is numerically zero");
    }
  }
  Matrix x = b;
  const Index nrhs = b.cols();
  if (uplo == UpLo::Upper) {
    for (Index i = n; i-- > 0;) {
      for (Index c = i + 1; c < n; ++c) {
        const double ric = r(i, c);
        if (ric == 0.0) continue;
        for (Index k = 0; k < nrhs; ++k) x(i, k) -= ric * x(c, k);
      }
      for (Index k = 0; k < nrhs; ++k) x(i, k) /= r(i, i);
    }
  } else {
    for (Index i = 0; i < n; ++i) {
      for (Index c = 0; c < i; ++c) {
        const double ric = r(i, c);
        if (ric == 0.0) continue;
        for (Index k = 0; k < nrhs; ++k) x(i, k) -= ric * x(c, k);
      }
      for (Index k = 0; k < nrhs; ++k) x(i, k) /= r(i, i);
    }
  }
  return x;
}

}  // namespace metafact::kernels
