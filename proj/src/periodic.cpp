#include "metafact/periodic.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <string>

#include "metafact/kernels.hpp"

namespace metafact::periodic {

namespace {

double power_defect(const Matrix& z, Index n_period) {
  return frobenius_norm(matrix_power(z, n_period) - Matrix::identity(z.rows()));
}

double rel(const Matrix& x, const Matrix& ref) {
  const double scale = frobenius_norm(ref);
  return frobenius_norm(x - ref) / (scale == 0.0 ? 1.0 : scale);
}

}  // namespace

PeriodicGenerators::PeriodicGenerators(Matrix z_c, Matrix z_r, Index n_period)
    : z_c_(std::move(z_c)), z_r_(std::move(z_r)), n_period_(n_period) {
  if (n_period_ == 0) throw Error(ErrorKind::InvalidPeriod, "period must be at least 1");
  const Index k = z_c_.rows();
  if (k == 0 || z_c_.cols() != k || z_r_.rows() != k || z_r_.cols() != k) {
    throw Error(ErrorKind::DimensionMismatch, "generators must be square and of equal size");
  }
  const double tol = 1e-10 * std::sqrt(static_cast<double>(k));
  const double dc = power_defect(z_c_, n_period_);
  const double dr = power_defect(z_r_, n_period_);
  if (!(dc <= tol) || !(dr <= tol)) {
    throw Error(ErrorKind::InvalidPeriod, "generator does not satisfy Z^" + std::to_string(n_period_) +
                                              " = I (defects " + std::to_string(dc) + ", " +
                                              std::to_string(dr) + ")");
  }
}

std::string_view kind_name(GeneratorKind kind) noexcept {
  return kind == GeneratorKind::Shift ? "shift" : "rotation";
}

Matrix matrix_power(const Matrix& z, Index p) {
  Matrix out = Matrix::identity(z.rows());
  for (Index i = 0; i < p; ++i) out = out * z;
  return out;
}

Matrix make_cyclic_generator(Index k, Index n_period, GeneratorKind kind) {
  if (k == 0) throw Error(ErrorKind::InvalidArgument, "generator size must be at least 1");
  if (n_period == 0) throw Error(ErrorKind::InvalidPeriod, "period must be at least 1");
  Matrix z(k, k);
  if (kind == GeneratorKind::Shift) {
    if (k % n_period != 0) {
      throw Error(ErrorKind::InvalidPeriod, "shift generator needs the period " + std::to_string(n_period) +
                                                " to divide k = " + std::to_string(k));
    }
    for (Index b = 0; b < k; b += n_period)
      for (Index i = 0; i < n_period; ++i) z(b + i, b + (i + 1) % n_period) = 1.0;
  } else {
    if (k % 2 != 0) throw Error(ErrorKind::InvalidPeriod, "rotation generator needs an even k, got " + std::to_string(k));
    const double theta = 2.0 * std::numbers::pi / static_cast<double>(n_period);
    auto snap = [](double v) { return std::abs(v) <= 4.0 * kEps ? 0.0 : v; };
    const double c = snap(std::cos(theta));
    const double s = snap(std::sin(theta));
    for (Index b = 0; b < k; b += 2) {
      z(b, b) = c;
      z(b, b + 1) = -s;
      z(b + 1, b) = s;
      z(b + 1, b + 1) = c;
    }
  }
  const double defect = power_defect(z, n_period);
  if (!(defect <= 1e-12 * std::sqrt(static_cast<double>(k)))) {
    throw Error(ErrorKind::InvalidPeriod, "constructed generator misses Z^N = I by " + std::to_string(defect));
  }
  return z;
}

PeriodicFactorization periodic_meta_factorize(const Matrix& a, const core::BasisPair& basis,
                                              const PeriodicGenerators& gen) {
  const auto start = std::chrono::steady_clock::now();
  const Index k = gen.k();
  if (basis.f.rows() != a.rows() || basis.h.rows() != a.cols() || basis.f.cols() != k || basis.h.cols() != k) {
    throw Error(ErrorKind::DimensionMismatch, "basis does not conform to a and the generators");
  }
  require_finite(a);
  if (kernels::numerical_rank(basis.f) < k || kernels::numerical_rank(basis.h) < k) {
    throw Error(ErrorKind::RankDeficientAnchor, "periodic bases must have full column rank " + std::to_string(k));
  }
  const Matrix yt = gen.z_c() * kernels::pinv(basis.f);
  const Matrix x = kernels::pinv(basis.h.transpose()) * gen.z_r();

  PeriodicFactorization out;
  out.pair = {yt.transpose(), x, k, false};
  out.meta.basis = basis;
  out.meta.k = k;
  out.meta.g = core::mixing_matrix(a, out.pair);
  out.meta.report = core::verify_idempotent(out.pair, basis, core::projector_tolerance(basis));
  out.meta.report.residual_rel = core::relative_residual(a, core::reconstruct(basis.f, out.meta.g, basis.h));
  out.meta.report.detected_rank = kernels::numerical_rank(out.meta.g);
  out.meta.report.elapsed_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

PowerDefects projector_power_defects(const core::BasisPair& basis, const core::ProjectorPair& pair,
                                     Index n_period) {
  const Matrix p = times_transpose(basis.f, pair.y);
  const Matrix r = times_transpose(pair.x, basis.h);
  Matrix pn = p;
  Matrix rn = r;
  for (Index i = 1; i < n_period; ++i) {
    pn = pn * p;
    rn = rn * r;
  }
  PowerDefects out;
  out.column = rel(pn, basis.f * kernels::pinv(basis.f));
  out.row = rel(rn, kernels::pinv(basis.h.transpose()) * basis.h.transpose());
  return out;
}

PeriodicityReport verify_periodicity(const Matrix& a, const core::BasisPair& basis,
                                     const core::ProjectorPair& pair, const PeriodicGenerators& gen,
                                     Index p_max) {
  if (basis.f.rows() != a.rows() || basis.h.rows() != a.cols() || pair.y.rows() != a.rows() ||
      pair.x.rows() != a.cols()) {
    throw Error(ErrorKind::DimensionMismatch, "basis and projector pair do not conform to a");
  }
  PeriodicityReport rep;
  rep.n_period = gen.n_period();
  rep.p_max = p_max;
  rep.powers.push_back({0, true, 0.0});
  Matrix current = a;
  const Index total = gen.n_period() * p_max;
  for (Index t = 1; t <= total; ++t) {
    current = basis.f * transpose_times(pair.y, current);
    current = times_transpose(current * pair.x, basis.h);
    PowerResidual entry{t, t % gen.n_period() == 0, core::relative_residual(a, current)};
    if (entry.multiple_of_period) rep.max_period_residual = std::max(rep.max_period_residual, entry.residual_rel);
    rep.powers.push_back(entry);
  }
  rep.holds = rep.max_period_residual <= rep.tolerance;
  return rep;
}

}  // namespace metafact::periodic
