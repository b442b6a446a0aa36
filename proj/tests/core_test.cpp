#include <gtest/gtest.h>

#include "metafact/core.hpp"
#include "metafact/kernels.hpp"
#include "test_support.hpp"

namespace metafact::core {
namespace {

using testing::random_gaussian;
using testing::random_rank_k;

// Leading k left/right singular vectors of a, for exact bases.
BasisPair svd_basis(const Matrix& a, Index k) {
  const kernels::SvdFactors f = kernels::svd(a);
  return {f.u.block(0, 0, a.rows(), k), f.v.block(0, 0, a.cols(), k)};
}

double truncated_svd_error(const Matrix& a, Index k) {
  const Vector s = kernels::singular_values(a);
  double tail = 0.0;
  for (Index i = k; i < s.size(); ++i) tail += s[i] * s[i];
  return std::sqrt(tail) / frobenius_norm(a);
}

TEST(ProjectorEquation, OrthonormalBasisIsItsOwnSolution) {
  const kernels::QrFactors q = kernels::qr(random_gaussian(6, 3, 1));
  const BasisPair basis{q.q, q.q};
  const ProjectorPair pair = solve_projector_equation(basis, {q.q, q.q});
  EXPECT_LE(frobenius_norm(pair.y - q.q), 1e-14);
  EXPECT_FALSE(pair.oblique);
}

TEST(ProjectorEquation, ScaledColumn) {
  const Matrix f{{2}, {0}};
  const ProjectorPair pair = solve_projector_equation({f, f}, {f, f});
  EXPECT_EQ(pair.y, (Matrix{{0.5}, {0}}));
}

TEST(ProjectorEquation, ObliqueAnchorGivesIdempotentNonSymmetricProjector) {
  const Matrix f{{1}, {1}};
  const Matrix b{{1}, {0}};
  const BasisPair basis{f, f};
  const ProjectorPair pair = solve_projector_equation(basis, {b, b});
  EXPECT_EQ(pair.y.transpose(), (Matrix{{1, 0}}));
  const Matrix p = column_projector(basis, pair);
  EXPECT_EQ(p, (Matrix{{1, 0}, {1, 0}}));
  EXPECT_EQ(p * p, p);
}

TEST(ProjectorEquation, RankDeficientAnchorIsTyped) {
  const Matrix f{{1}, {0}};
  const Matrix b{{0}, {1}};
  try {
    solve_projector_equation({f, f}, {b, f});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::RankDeficientAnchor);
  }
}

TEST(ProjectorEquation, DimensionMismatch) {
  const Matrix f = random_gaussian(5, 2, 1);
  const Matrix h = random_gaussian(4, 2, 2);
  try {
    solve_projector_equation({f, h}, {random_gaussian(4, 2, 3), h});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DimensionMismatch);
  }
  EXPECT_THROW(solve_projector_equation({f, random_gaussian(4, 3, 2)}, {f, h}), Error);
}

TEST(ProjectorEquation, SquareCaseProperties) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    Rng dims(seed);
    const Index k = 1 + dims.below(10);
    const Index m = k + dims.below(50);
    const Index n = k + dims.below(50);
    const BasisPair basis{random_gaussian(m, k, seed + 1), random_gaussian(n, k, seed + 2)};
    const SketchPair sketch{random_gaussian(m, k, seed + 3), random_gaussian(n, k, seed + 4)};
    const ProjectorPair pair = solve_projector_equation(basis, sketch);
    EXPECT_LE(frobenius_norm(transpose_times(pair.y, basis.f) - Matrix::identity(k)), 1e-10);
    EXPECT_LE(frobenius_norm(transpose_times(basis.h, pair.x) - Matrix::identity(k)), 1e-10);
    const Matrix p = column_projector(basis, pair);
    const Matrix r = row_projector(basis, pair);
    EXPECT_LE(frobenius_norm(p * p - p), 1e-10 * frobenius_norm(p));
    EXPECT_LE(frobenius_norm(r * r - r), 1e-10 * frobenius_norm(r));
    EXPECT_EQ(kernels::numerical_rank(p), k);
    EXPECT_EQ(kernels::numerical_rank(r), k);
  }
}

TEST(ProjectorEquation, ObliqueCaseProperties) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    Rng dims(seed + 500);
    const Index k = 1 + dims.below(10);
    const Index p = k + 1 + dims.below(5);
    const Index m = p + dims.below(40);
    const Index n = p + dims.below(40);
    const BasisPair basis{random_gaussian(m, k, seed + 1), random_gaussian(n, k, seed + 2)};
    const SketchPair sketch{random_gaussian(m, p, seed + 3), random_gaussian(n, p, seed + 4)};
    const ProjectorPair pair = solve_projector_equation(basis, sketch);
    EXPECT_TRUE(pair.oblique);
    const Matrix& f = basis.f;
    const Matrix ht = basis.h.transpose();
    EXPECT_LE(frobenius_norm(f * transpose_times(pair.y, f) - f), 1e-9 * frobenius_norm(f));
    EXPECT_LE(frobenius_norm(ht * pair.x * ht - ht), 1e-9 * frobenius_norm(ht));
    const Matrix proj = column_projector(basis, pair);
    EXPECT_LE(frobenius_norm(proj * proj - proj), 1e-10 * frobenius_norm(proj));
    // Oblique: not symmetric in general.
    EXPECT_GT(frobenius_norm(proj - proj.transpose()), 1e-6);
  }
}

TEST(ProjectorEquation, ScaleEquivarianceLeavesProjectorUnchanged) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Index m = 20, n = 15, k = 4;
    const BasisPair basis{random_gaussian(m, k, seed), random_gaussian(n, k, seed + 1)};
    const SketchPair sketch{random_gaussian(m, k, seed + 2), random_gaussian(n, k, seed + 3)};
    const Matrix gamma = Matrix::diagonal(Vector{0.5, 3.0, -2.0, 10.0});
    const BasisPair scaled{basis.f * gamma, basis.h};
    const ProjectorPair p1 = solve_projector_equation(basis, sketch);
    const ProjectorPair p2 = solve_projector_equation(scaled, sketch);
    EXPECT_LE(testing::rel_diff(column_projector(scaled, p2), column_projector(basis, p1)), 1e-10);
    // yᵀ scales by Γ⁻¹.
    const Matrix gamma_inv = Matrix::diagonal(Vector{2.0, 1.0 / 3.0, -0.5, 0.1});
    EXPECT_LE(testing::rel_diff(p2.y.transpose(), gamma_inv * p1.y.transpose()), 1e-10);
  }
}

TEST(VerifyIdempotent, IdentityProjectorHasZeroDefect) {
  const Matrix id = Matrix::identity(3);
  const BasisPair basis{id, id};
  const ProjectorPair pair{id, id, 3, false};
  const FactorReport report = verify_idempotent(pair, basis, 1e-12);
  EXPECT_EQ(report.idem_defect_p, 0.0);
  EXPECT_EQ(report.idem_defect_r, 0.0);
  EXPECT_EQ(report.rank_p, 3u);
  EXPECT_TRUE(report.within_tolerance);
}

TEST(VerifyIdempotent, RandomTrialsAndBrokenProjector) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng dims(seed + 100);
    const Index k = 1 + dims.below(10);
    const Index m = k + dims.below(40);
    const BasisPair basis{random_gaussian(m, k, seed), random_gaussian(m, k, seed + 7)};
    const ProjectorPair pair =
        solve_projector_equation(basis, {random_gaussian(m, k, seed + 1), random_gaussian(m, k, seed + 2)});
    const FactorReport report = verify_idempotent(pair, basis, 1e-10);
    EXPECT_LE(report.idem_defect_p, 1e-10);
    EXPECT_LE(report.idem_defect_r, 1e-10);
    EXPECT_EQ(report.rank_p, k);
    EXPECT_EQ(report.rank_r, k);
  }
  // A pair that does not solve the projector equation is reported, not thrown.
  const Matrix f{{1}, {0}};
  const ProjectorPair bad{2.0 * f, f, 1, false};
  const FactorReport report = verify_idempotent(bad, {f, f}, 1e-10);
  EXPECT_FALSE(report.within_tolerance);
  EXPECT_NEAR(report.idem_defect_p, 1.0, 1e-15);  // P = 2e1e1ᵀ: ‖P² − P‖/‖P‖ = 2/2
}

TEST(MixingMatrix, IdentityBases) {
  const Matrix e = Matrix::eye(5, 2);
  const ProjectorPair pair = solve_projector_equation({e, e}, {e, e});
  EXPECT_EQ(mixing_matrix(Matrix::identity(5), pair), Matrix::identity(2));
}

TEST(MixingMatrix, AssociationDoesNotChangeValue) {
  const Matrix a = random_gaussian(8, 13, 4);
  const BasisPair basis{random_gaussian(8, 3, 1), random_gaussian(13, 3, 2)};
  const ProjectorPair pair = solve_projector_equation(basis, {basis.f, basis.h});
  const Matrix g = mixing_matrix(a, pair);
  const Matrix g2 = transpose_times(pair.y, a) * pair.x;
  EXPECT_LE(testing::rel_diff(g, g2), 1e-13);
}

TEST(Reconstruct, Examples) {
  const Matrix g{{1, 2}, {3, 4}};
  EXPECT_EQ(reconstruct(Matrix::identity(2), g, Matrix::identity(2)), g);
  EXPECT_EQ(reconstruct(random_gaussian(4, 2, 1), Matrix(2, 2), random_gaussian(3, 2, 2)), Matrix(4, 3));
  EXPECT_THROW(reconstruct(Matrix::identity(2), Matrix(3, 3), Matrix::identity(2)), Error);
}

TEST(MetaFactorize, Identity) {
  const Matrix id = Matrix::identity(3);
  const MetaFactorization mf = meta_factorize(id, {id, id}, {id, id});
  EXPECT_EQ(mf.g, id);
  EXPECT_EQ(mf.report.residual_rel, 0.0);
}

TEST(MetaFactorize, ExactBasesReconstruct) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Matrix a = random_rank_k(20, 15, 5, seed);
    const BasisPair basis = svd_basis(a, 5);
    const MetaFactorization mf = meta_factorize(a, basis, {basis.f, basis.h});
    EXPECT_LE(mf.report.residual_rel, 1e-10);
    EXPECT_EQ(mf.report.detected_rank, 5u);
    EXPECT_GE(mf.report.elapsed_seconds, 0.0);
    // Generic rectangular anchors (oblique projectors) also reconstruct.
    const MetaFactorization mf2 =
        meta_factorize(a, basis, {random_gaussian(20, 5, seed + 9), random_gaussian(15, 7, seed + 8)});
    EXPECT_LE(mf2.report.residual_rel, 1e-9);
  }
}

TEST(MetaFactorize, IllConditionedBasisUsedAsItsOwnAnchor) {
  // f = A·Ω with cond(f) in the thousands; fᵀf would be near 1e7.
  const Matrix a = random_rank_k(23, 28, 9, 3);
  Matrix f = a * random_gaussian(28, 9, 4);
  for (Index i = 0; i < f.rows(); ++i) f(i, 8) = f(i, 7) + 1e-3 * f(i, 8);
  const Matrix h = transpose_times(a, random_gaussian(23, 9, 5));
  const BasisPair basis{f, h};
  const MetaFactorization mf = meta_factorize(a, basis, {f, h});
  EXPECT_LE(mf.report.residual_rel, 1e-10);
  const ProjectorPair pair = solve_projector_equation(basis, {f, h});
  EXPECT_LE(frobenius_norm(transpose_times(pair.y, f) - Matrix::identity(9)), 1e-10);
}

TEST(MetaFactorize, LowRankBasisIsReportedNotRejected) {
  const Matrix a = random_rank_k(20, 15, 5, 42);
  const BasisPair basis = svd_basis(a, 3);
  const MetaFactorization mf = meta_factorize(a, basis, {basis.f, basis.h});
  const double oracle = truncated_svd_error(a, 3);
  EXPECT_GT(mf.report.residual_rel, 0.0);
  EXPECT_NEAR(mf.report.residual_rel, oracle, 1e-10);
}

TEST(PenroseGeneralSolution, ParticularSolutionAtZero) {
  const Matrix a = random_rank_k(9, 7, 3, 1);
  const BasisPair basis = svd_basis(a, 3);
  const SketchPair sketch{basis.f, basis.h};
  const ProjectorPair pair = solve_projector_equation(basis, sketch);
  EXPECT_EQ(penrose_general_solution(a, basis, sketch, Matrix(3, 3)), mixing_matrix(a, pair));
}

TEST(PenroseGeneralSolution, SquareCaseIgnoresW) {
  const Matrix a = random_rank_k(9, 7, 3, 2);
  const BasisPair basis{random_gaussian(9, 3, 3), random_gaussian(7, 3, 4)};
  const SketchPair sketch{random_gaussian(9, 3, 5), random_gaussian(7, 3, 6)};
  const Matrix w = random_gaussian(3, 3, 7);
  const Matrix g0 = penrose_general_solution(a, basis, sketch, Matrix(3, 3));
  const Matrix gw = penrose_general_solution(a, basis, sketch, w);
  // ‖YᵀF‖_F = ‖HᵀX‖_F = √k, so the product term is bounded by k·‖w‖_F.
  const double scale = frobenius_norm(g0) + 3.0 * frobenius_norm(w);
  EXPECT_LE(frobenius_norm(gw - g0), 256.0 * 3 * kEps * scale);
}

TEST(PenroseGeneralSolution, ObliqueCaseHomogeneousPartVanishes) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Matrix a = random_rank_k(14, 11, 4, seed);
    const BasisPair basis = svd_basis(a, 4);
    const SketchPair sketch{random_gaussian(14, 7, seed + 1), random_gaussian(11, 6, seed + 2)};
    const Matrix w = random_gaussian(4, 4, seed + 3);
    const Matrix g0 = penrose_general_solution(a, basis, sketch, Matrix(4, 4));
    const Matrix gw = penrose_general_solution(a, basis, sketch, w);
    const Matrix diff = reconstruct(basis.f, gw, basis.h) - reconstruct(basis.f, g0, basis.h);
    EXPECT_LE(frobenius_norm(diff), 1e-10 * frobenius_norm(a));
    // The homogeneous term itself: f·(w − YᵀF·w·HᵀX)·hᵀ = 0.
    const Matrix homogeneous = gw - g0;
    EXPECT_LE(frobenius_norm(reconstruct(basis.f, homogeneous, basis.h)),
              1e-10 * frobenius_norm(basis.f) * frobenius_norm(w) * frobenius_norm(basis.h));
  }
}

TEST(PenroseGeneralSolution, WrongShapeOfW) {
  const Matrix id = Matrix::identity(3);
  EXPECT_THROW(penrose_general_solution(id, {id, id}, {id, id}, Matrix(2, 2)), Error);
}

TEST(VectorEquation, IdentitySystem) {
  const Vector x = solve_vector_equation(Matrix::identity(2), Vector{1, 2}, Matrix::identity(2), Vector{7, -3});
  EXPECT_NEAR(x[0], 1.0, 1e-15);
  EXPECT_NEAR(x[1], 2.0, 1e-15);
}

TEST(VectorEquation, MinimumNormAndNullspaceShift) {
  const Matrix a{{1, 2}, {2, 4}};
  const Vector x0 = solve_vector_equation(a, Vector{1, 2}, a, Vector{0, 0});
  // a⁺c = (1/25)·a·(1,2) = (0.2, 0.4).
  EXPECT_NEAR(x0[0], 0.2, 1e-14);
  EXPECT_NEAR(x0[1], 0.4, 1e-14);
  // (2,-1) spans the nullspace of a, so it passes through (I − a⁺a) unchanged.
  const Vector x1 = solve_vector_equation(a, Vector{1, 2}, a, Vector{2, -1});
  EXPECT_NEAR(x1[0], 2.2, 1e-14);
  EXPECT_NEAR(x1[1], -0.6, 1e-14);
  const Vector ax = a * std::span<const double>(x1);
  EXPECT_NEAR(ax[0], 1.0, 1e-14);
  EXPECT_NEAR(ax[1], 2.0, 1e-14);
}

TEST(VectorEquation, InconsistentRightHandSide) {
  const Matrix a{{1, 2}, {2, 4}};
  try {
    solve_vector_equation(a, Vector{1, 0}, a, Vector{0, 0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InconsistentSystem);
  }
}

TEST(VectorEquation, RandomRankDeficientSystems) {
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const Matrix a = random_rank_k(8, 6, 3, seed);
    const Vector z = random_gaussian(6, 1, seed + 1).col(0);
    const Vector c = a * std::span<const double>(z);
    const Vector y = random_gaussian(6, 1, seed + 2).col(0);
    const Matrix b = random_gaussian(8, 8, seed + 3);
    const Vector x = solve_vector_equation(a, c, b, y);
    const Vector ax = a * std::span<const double>(x);
    for (Index i = 0; i < 8; ++i) EXPECT_NEAR(ax[i], c[i], 1e-10 * norm2(c));
  }
}

}  // namespace
}  // namespace metafact::core
