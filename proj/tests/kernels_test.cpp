#include <gtest/gtest.h>

#include <cmath>

#include "metafact/kernels.hpp"
#include "test_support.hpp"

namespace metafact::kernels {
namespace {

using testing::random_gaussian;
using testing::random_rank_k;

TEST(Qr, IdentityIsFixedPoint) {
  const QrFactors f = qr(Matrix::identity(3));
  EXPECT_EQ(f.q, Matrix::identity(3));
  EXPECT_EQ(f.r, Matrix::identity(3));
  EXPECT_EQ(f.perm, (Permutation{0, 1, 2}));
}

TEST(Qr, PermutationMatrixHasUnitDiagonal) {
  const QrFactors f = qr(Matrix{{0, 1}, {1, 0}}, true);
  EXPECT_NEAR(std::abs(f.r(0, 0)), 1.0, 1e-15);
  EXPECT_NEAR(std::abs(f.r(1, 1)), 1.0, 1e-15);
}

TEST(Qr, PivotingExposesRankOne) {
  const Matrix a{{1, 2}, {2, 4}, {3, 6}};
  const QrFactors f = qr(a, true);
  // Gram-Schmidt by hand: column 1 = (2,4,6) has the larger norm sqrt(56) and
  // column 0 is exactly half of it.
  EXPECT_EQ(f.perm, (Permutation{1, 0}));
  EXPECT_NEAR(f.r(0, 0), std::sqrt(56.0), 1e-14);
  EXPECT_LE(std::abs(f.r(1, 1)), 64.0 * 3.0 * kEps * frobenius_norm(a));
}

TEST(Qr, FullModeIsSquare) {
  const Matrix a = random_gaussian(7, 3, 11);
  const QrFactors f = qr(a, false, true);
  EXPECT_EQ(f.q.rows(), 7u);
  EXPECT_EQ(f.q.cols(), 7u);
  EXPECT_EQ(f.r.rows(), 7u);
  EXPECT_LE(orthonormality_defect(f.q), 64.0 * 7 * kEps);
  EXPECT_LE(frobenius_norm(f.q * f.r - a), 64.0 * 7 * kEps * frobenius_norm(a));
}

TEST(Qr, RandomInstancesReconstructWithHardZeros) {
  for (std::uint64_t seed = 0; seed < 40; ++seed) {
    Rng dims(seed + 1000);
    const Index m = 1 + dims.below(50);
    const Index n = 1 + dims.below(50);
    const Matrix a = random_gaussian(m, n, seed);
    for (bool pivot : {false, true}) {
      const QrFactors f = qr(a, pivot);
      const Matrix ap = a.select_cols(f.perm);
      EXPECT_LE(frobenius_norm(f.q * f.r - ap), 64.0 * std::max(m, n) * kEps * frobenius_norm(a));
      EXPECT_LE(orthonormality_defect(f.q), 64.0 * n * kEps + 64.0 * m * kEps);
      // a·Π = q·r with the matrix form of the permutation.
      EXPECT_LE(frobenius_norm(a * f.perm_matrix() - f.q * f.r),
                64.0 * std::max(m, n) * kEps * frobenius_norm(a));
      for (Index i = 0; i < f.r.rows(); ++i) {
        EXPECT_GE(f.r(i, std::min(i, n - 1)), i < n ? 0.0 : -1.0);
        for (Index j = 0; j < std::min(i, n); ++j) EXPECT_EQ(f.r(i, j), 0.0);
      }
      if (pivot) {
        for (Index i = 0; i + 1 < std::min(m, n); ++i) {
          EXPECT_GE(std::abs(f.r(i, i)), std::abs(f.r(i + 1, i + 1)) * (1 - 1e-12));
        }
      }
    }
  }
}

TEST(Qr, RejectsEmptyAndNonFinite) {
  try {
    qr(Matrix(0, 3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::InvalidDimension);
  }
  EXPECT_THROW(Matrix(1, 1, {std::nan("")}), Error);
}

TEST(Svd, DiagonalInput) {
  const SvdFactors f = svd(Matrix{{3, 0}, {0, 2}});
  ASSERT_EQ(f.s.size(), 2u);
  EXPECT_DOUBLE_EQ(f.s[0], 3.0);
  EXPECT_DOUBLE_EQ(f.s[1], 2.0);
  for (Index i = 0; i < 2; ++i)
    for (Index j = 0; j < 2; ++j) EXPECT_EQ(std::abs(f.u(i, j)), i == j ? 1.0 : 0.0);
}

TEST(Svd, RankOneFromGramTrace) {
  const Matrix a{{1, 2}, {2, 4}, {3, 6}};
  const SvdFactors f = svd(a);
  // trace(aᵀa) = 70 and the Gram matrix has a single nonzero eigenvalue.
  EXPECT_NEAR(f.s[0], std::sqrt(70.0), 1e-12 * std::sqrt(70.0));
  EXPECT_LE(f.s[1], 1e-12 * std::sqrt(70.0));
}

TEST(Svd, ZeroMatrix) {
  const SvdFactors f = svd(Matrix(2, 2));
  EXPECT_EQ(f.s, (Vector{0.0, 0.0}));
  EXPECT_LE(orthonormality_defect(f.u), 1e-15);
  EXPECT_LE(orthonormality_defect(f.v), 1e-15);
}

TEST(Svd, InvariantsOnRandomAndRankDeficient) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Rng dims(seed + 77);
    const Index m = 1 + dims.below(40);
    const Index n = 1 + dims.below(40);
    const Index k = 1 + dims.below(std::min(m, n));
    const Matrix a = seed % 2 == 0 ? random_gaussian(m, n, seed) : random_rank_k(m, n, k, seed);
    const SvdFactors f = svd(a);
    const Index p = std::min(m, n);
    ASSERT_EQ(f.s.size(), p);
    for (Index i = 0; i + 1 < p; ++i) EXPECT_GE(f.s[i], f.s[i + 1]);
    for (double s : f.s) EXPECT_GE(s, 0.0);
    EXPECT_LE(orthonormality_defect(f.u), 64.0 * p * kEps);
    EXPECT_LE(orthonormality_defect(f.v), 64.0 * p * kEps);
    Matrix us = f.u;
    for (Index j = 0; j < p; ++j)
      for (Index i = 0; i < m; ++i) us(i, j) *= f.s[j];
    EXPECT_LE(frobenius_norm(times_transpose(us, f.v) - a),
              64.0 * std::max(m, n) * kEps * frobenius_norm(a));
  }
}

TEST(Svd, MatchesJacobiEigenOracle) {
  for (std::uint64_t seed = 0; seed < 25; ++seed) {
    Rng dims(seed + 5);
    const Index n = 1 + dims.below(8);
    const Index m = n + dims.below(6);
    const Matrix a = random_gaussian(m, n, seed);
    const Vector s = singular_values(a);
    const std::vector<double> oracle = testing::oracle_singular_values(a);
    for (Index i = 0; i < n; ++i) EXPECT_NEAR(s[i], oracle[i], 1e-10 * oracle[0]);
  }
}

TEST(Svd, Deterministic) {
  const Matrix a = random_gaussian(12, 9, 3);
  const SvdFactors f1 = svd(a);
  const SvdFactors f2 = svd(a);
  EXPECT_EQ(f1.u, f2.u);
  EXPECT_EQ(f1.s, f2.s);
  EXPECT_EQ(f1.v, f2.v);
}

TEST(Lu, Identity) {
  const LuFactors f = lu(Matrix::identity(2));
  EXPECT_EQ(f.l, Matrix::identity(2));
  EXPECT_EQ(f.u, Matrix::identity(2));
  EXPECT_EQ(f.perm, (Permutation{0, 1}));
}

TEST(Lu, ZeroPivotForcesSwap) {
  const LuFactors f = lu(Matrix{{0, 1}, {1, 0}});
  EXPECT_EQ(f.perm, (Permutation{1, 0}));
  EXPECT_EQ(f.l, Matrix::identity(2));
  EXPECT_EQ(f.u, Matrix::identity(2));
}

TEST(Lu, HandElimination) {
  const LuFactors f = lu(Matrix{{2, 1}, {4, 3}});
  EXPECT_EQ(f.perm, (Permutation{1, 0}));
  EXPECT_EQ(f.l, (Matrix{{1, 0}, {0.5, 1}}));
  EXPECT_EQ(f.u, (Matrix{{4, 3}, {0, -0.5}}));
}

TEST(Lu, RandomResidualAndStructure) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Index k = 1 + seed % 12;
    const Matrix a = random_gaussian(k, k, seed);
    const LuFactors f = lu(a);
    for (Index i = 0; i < k; ++i) {
      EXPECT_EQ(f.l(i, i), 1.0);
      for (Index j = i + 1; j < k; ++j) EXPECT_EQ(f.l(i, j), 0.0);
      for (Index j = 0; j < i; ++j) EXPECT_EQ(f.u(i, j), 0.0);
    }
    EXPECT_LE(frobenius_norm(a.select_rows(f.perm) - f.l * f.u), 64.0 * k * kEps * frobenius_norm(a));
  }
}

TEST(Lu, RejectsRectangular) {
  try {
    lu(Matrix(2, 3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::NotSquare);
  }
}

TEST(Pinv, Examples) {
  EXPECT_EQ(pinv(Matrix::identity(3)), Matrix::identity(3));
  const Matrix a{{1, 2}, {2, 4}};
  EXPECT_LE(frobenius_norm(pinv(a) - (1.0 / 25.0) * a), 1e-15);
  const Matrix z = pinv(Matrix(3, 2));
  EXPECT_EQ(z, Matrix(2, 3));
}

TEST(Pinv, PenroseEquationsHold) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Rng dims(seed + 9);
    const Index m = 2 + dims.below(30);
    const Index n = 2 + dims.below(30);
    const bool deficient = seed % 2 == 1;
    const Matrix a = deficient ? random_rank_k(m, n, 1 + dims.below(std::min(m, n) - 1), seed)
                               : random_gaussian(m, n, seed);
    const Matrix ap = pinv(a);
    const double na = frobenius_norm(a);
    const double scale = 256.0 * std::max(m, n) * kEps * std::max(na, frobenius_norm(ap) * na * na);
    EXPECT_LE(frobenius_norm(a * ap * a - a), scale);
    EXPECT_LE(frobenius_norm(ap * a * ap - ap), scale);
    const Matrix aap = a * ap;
    const Matrix apa = ap * a;
    EXPECT_LE(frobenius_norm(aap.transpose() - aap), scale);
    EXPECT_LE(frobenius_norm(apa.transpose() - apa), scale);
  }
}

TEST(Rref, Examples) {
  const RrefResult id = rref(Matrix::identity(2));
  EXPECT_EQ(id.echelon, Matrix::identity(2));
  EXPECT_EQ(id.pivots, (std::vector<Index>{0, 1}));

  const RrefResult r1 = rref(Matrix{{1, 2}, {2, 4}, {3, 6}});
  EXPECT_EQ(r1.echelon, (Matrix{{1, 2}, {0, 0}, {0, 0}}));
  EXPECT_EQ(r1.pivots, (std::vector<Index>{0}));

  const RrefResult r2 = rref(Matrix{{0, 0}, {0, 5}});
  EXPECT_EQ(r2.echelon, (Matrix{{0, 1}, {0, 0}}));
  EXPECT_EQ(r2.pivots, (std::vector<Index>{1}));
}

TEST(Rref, Idempotent) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    Rng dims(seed + 31);
    const Index m = 1 + dims.below(10);
    const Index n = 1 + dims.below(10);
    const Matrix a = seed % 2 ? random_rank_k(m, n, 1 + dims.below(std::min(m, n)), seed)
                              : random_gaussian(m, n, seed);
    const RrefResult once = rref(a);
    const RrefResult twice = rref(once.echelon);
    EXPECT_EQ(twice.echelon, once.echelon);
    EXPECT_EQ(twice.pivots, once.pivots);
  }
}

TEST(Rref, RankRevealingIgnoresEliminationNoise) {
  // Rank-4 product whose plain rref picks up a fifth pivot from rounding.
  const Matrix a = testing::random_uniform(13, 4, -1, 1, 6) * testing::random_uniform(4, 14, -1, 1, 7);
  const RrefResult plain = rref(a);
  const RrefResult revealing = rref_rank_revealing(a);
  EXPECT_EQ(revealing.pivots.size(), 4u);
  EXPECT_GE(plain.pivots.size(), revealing.pivots.size());
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng dims(seed + 500);
    const Index k = 1 + dims.below(6);
    const Index m = k + dims.below(25);
    const Index n = k + dims.below(25);
    const Matrix b = testing::random_uniform(m, k, -1, 1, 2 * seed) *
                     testing::random_uniform(k, n, -1, 1, 2 * seed + 1);
    EXPECT_EQ(rref_rank_revealing(b).pivots.size(), k) << "seed " << seed;
    const Matrix full = random_gaussian(m, n, seed);
    EXPECT_EQ(rref_rank_revealing(full).pivots.size(), std::min(m, n)) << "seed " << seed;
  }
}

TEST(Rref, RankRevealingKeepsExactEchelon) {
  const RrefResult r = rref_rank_revealing(Matrix{{1, 1, 2}, {0, 1, 1}});
  EXPECT_EQ(r.echelon, (Matrix{{1, 0, 1}, {0, 1, 1}}));
  EXPECT_EQ(r.pivots, (std::vector<Index>{0, 1}));
}

TEST(SolveTriangular, Examples) {
  const Matrix b{{1, 2}, {3, 4}};
  EXPECT_EQ(solve_triangular(Matrix::identity(2), b, Side::Left, UpLo::Upper), b);
  EXPECT_EQ(solve_triangular(Matrix{{2, 0}, {0, 4}}, Matrix{{2}, {4}}, Side::Left, UpLo::Lower),
            (Matrix{{1}, {1}}));
  EXPECT_EQ(solve_triangular(Matrix{{1, 1}, {0, 1}}, Matrix{{3}, {1}}, Side::Left, UpLo::Upper),
            (Matrix{{2}, {1}}));
}

TEST(SolveTriangular, RightSideMatchesDefinition) {
  const Matrix r{{2, 1, -1}, {0, 3, 0.5}, {0, 0, 1.5}};
  const Matrix b = random_gaussian(4, 3, 1);
  const Matrix x = solve_triangular(r, b, Side::Right, UpLo::Upper);
  EXPECT_LE(frobenius_norm(x * r - b), 1e-14 * frobenius_norm(b));
  const Matrix l = r.transpose();
  const Matrix y = solve_triangular(l, b, Side::Right, UpLo::Lower);
  EXPECT_LE(frobenius_norm(y * l - b), 1e-14 * frobenius_norm(b));
}

TEST(SolveTriangular, SingularDiagonal) {
  try {
    solve_triangular(Matrix{{1, 1}, {0, 0}}, Matrix{{1}, {1}}, Side::Left, UpLo::Upper);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SingularTriangular);
  }
}

TEST(NumericalRank, CountsAboveRelativeCutoff) {
  EXPECT_EQ(numerical_rank(Matrix{{1, 2}, {2, 4}, {3, 6}}), 1u);
  EXPECT_EQ(numerical_rank(Matrix(3, 3)), 0u);
  EXPECT_EQ(numerical_rank(random_rank_k(20, 15, 5, 4)), 5u);
}

}  // namespace
}  // namespace metafact::kernels
