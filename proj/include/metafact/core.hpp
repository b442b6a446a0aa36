#pragma once

#include "metafact/matrix.hpp"

/// The meta-factorization engine. A factorization A = F·G·Hᵀ is built from a
/// column-space basis F, a row-space basis H and a mixing matrix G = Yᵀ·A·X,
/// where Y and X solve the projector equation Yᵀ·F = Hᵀ·X = I_k.
namespace metafact::core {

/// Column-space basis f (m x k) and row-space basis h (n x k).
struct BasisPair {
  Matrix f;
  Matrix h;

  Index rows() const noexcept { return f.rows(); }
  Index cols() const noexcept { return h.rows(); }
};

/// Left anchor b (m x p) and right anchor d (n x q), p, q >= k.
struct SketchPair {
  Matrix b;
  Matrix d;
};

/// Solutions y (m x k) and x (n x k) of the projector equation.
struct ProjectorPair {
  Matrix y;
  Matrix x;
  Index k = 0;
  /// True when the anchors were rectangular and the pseudoinverse path ran.
  bool oblique = false;
};

/// Verification record attached to every factorization.
struct FactorReport {
  double residual_rel = 0.0;  ///< ‖A − F·G·Hᵀ‖_F / ‖A‖_F
  double idem_defect_p = 0.0;
  double idem_defect_r = 0.0;
  Index detected_rank = 0;
  Index rank_p = 0;
  Index rank_r = 0;
  bool within_tolerance = true;
  double elapsed_seconds = 0.0;
};

/// A = f·g·hᵀ. The mixing matrix is k_f x k_h; it is square except for
/// constructions with oversampled anchors (Nyström) or F = Hᵀ = A (pinv).
struct MetaFactorization {
  BasisPair basis;
  Matrix g;
  Index k = 0;
  FactorReport report;
};

/// Column projector P = f·yᵀ (m x m).
Matrix column_projector(const BasisPair& basis, const ProjectorPair& pair);
/// Row projector R = x·hᵀ (n x n).
Matrix row_projector(const BasisPair& basis, const ProjectorPair& pair);

/// Yᵀ = (bᵀf)⁺bᵀ and X = d(hᵀd)⁺. Square k x k anchor products go through
/// QR and a triangular solve; rectangular ones through the SVD pseudoinverse
/// and yield oblique projectors. Throws RankDeficientAnchor when either anchor
/// product has numerical rank below k.
ProjectorPair solve_projector_equation(const BasisPair& basis, const SketchPair& sketch);

/// Relative idempotency defects and ranks of P and R. Reports, never throws
/// on a violated tolerance.
FactorReport verify_idempotent(const ProjectorPair& pair, const BasisPair& basis, double tol);

/// G = yᵀ·a·x, associated (yᵀa)x when m >= n and yᵀ(ax) otherwise.
Matrix mixing_matrix(const Matrix& a, const ProjectorPair& pair);

/// (f·g)·hᵀ.
Matrix reconstruct(const Matrix& f, const Matrix& g, const Matrix& h);

/// Steps 1-3: solve the projector equation for the given bases and anchors,
/// form the mixing matrix and record the reconstruction residual. Poor bases
/// are reported through residual_rel, not rejected.
MetaFactorization meta_factorize(const Matrix& a, const BasisPair& basis, const SketchPair& sketch);

/// General solution G(w) = YᵀAX + w − YᵀF·w·HᵀX of F·G·Hᵀ = A.
Matrix penrose_general_solution(const Matrix& a, const BasisPair& basis, const SketchPair& sketch,
                                const Matrix& w);

/// General solution x = Yᵀc + (I − YᵀA)·y_free of A·x = c, with
/// Yᵀ = (bᵀA)⁺bᵀ. Throws InconsistentSystem when c is not in the column
/// space of A.
Vector solve_vector_equation(const Matrix& a, std::span<const double> c, const Matrix& b_anchor,
                             std::span<const double> y_free);

/// Relative residual ‖a − approx‖_F / ‖a‖_F, 0 when both are zero.
double relative_residual(const Matrix& a, const Matrix& approx);

/// Tolerance used for the projector-equation invariants.
double projector_tolerance(const BasisPair& basis);

}  // namespace metafact::core
