#include <gtest/gtest.h>

#include "metafact/kernels.hpp"
#include "metafact/periodic.hpp"
#include "test_support.hpp"

namespace metafact::periodic {
namespace {

using testing::random_gaussian;
using testing::random_rank_k;

template <typename F>
ErrorKind kind_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an Error";
  return ErrorKind::InvalidArgument;
}

core::BasisPair svd_basis(const Matrix& a, Index k) {
  const kernels::SvdFactors s = kernels::svd(a);
  return {s.u.block(0, 0, a.rows(), k), s.v.block(0, 0, a.cols(), k)};
}

// Random full-rank bases spanning the column and row spaces of a rank-k a.
struct Instance {
  Matrix a;
  core::BasisPair basis;
};

Instance random_instance(Index m, Index n, Index k, std::uint64_t seed) {
  const Matrix left = random_gaussian(m, k, seed);
  const Matrix right = random_gaussian(n, k, seed + 1);
  const Matrix mix_f = random_gaussian(k, k, seed + 2);
  const Matrix mix_h = random_gaussian(k, k, seed + 3);
  return {times_transpose(left, right), {left * mix_f, right * mix_h}};
}

TEST(Generators, Examples) {
  EXPECT_EQ(make_cyclic_generator(2, 2, GeneratorKind::Shift), (Matrix{{0, 1}, {1, 0}}));
  EXPECT_EQ(make_cyclic_generator(2, 4, GeneratorKind::Rotation), (Matrix{{0, -1}, {1, 0}}));
  EXPECT_EQ(make_cyclic_generator(3, 3, GeneratorKind::Shift), (Matrix{{0, 1, 0}, {0, 0, 1}, {1, 0, 0}}));
  EXPECT_EQ(make_cyclic_generator(4, 1, GeneratorKind::Shift), Matrix::identity(4));
}

TEST(Generators, OrderHolds) {
  for (Index n : {2, 3, 4, 6}) {
    const Matrix z = make_cyclic_generator(6, n, GeneratorKind::Rotation);
    EXPECT_LE(frobenius_norm(matrix_power(z, n) - Matrix::identity(6)), 1e-12 * std::sqrt(6.0));
    EXPECT_GT(frobenius_norm(matrix_power(z, n - 1) - Matrix::identity(6)), 0.5);
  }
  const Matrix shift = make_cyclic_generator(6, 3, GeneratorKind::Shift);
  EXPECT_EQ(matrix_power(shift, 3), Matrix::identity(6));
}

TEST(Generators, InvalidPeriods) {
  EXPECT_EQ(kind_of([] { make_cyclic_generator(4, 3, GeneratorKind::Shift); }), ErrorKind::InvalidPeriod);
  EXPECT_EQ(kind_of([] { make_cyclic_generator(3, 4, GeneratorKind::Rotation); }), ErrorKind::InvalidPeriod);
  EXPECT_EQ(kind_of([] { make_cyclic_generator(2, 0, GeneratorKind::Shift); }), ErrorKind::InvalidPeriod);
  const Matrix swap{{0, 1}, {1, 0}};
  EXPECT_EQ(kind_of([&] { PeriodicGenerators(swap, swap, 3); }), ErrorKind::InvalidPeriod);
  EXPECT_NO_THROW(PeriodicGenerators(swap, swap, 4));
}

TEST(PeriodicMeta, PeriodOneMatchesCorePath) {
  const Instance in = random_instance(14, 10, 3, 1);
  const PeriodicGenerators gen(Matrix::identity(3), Matrix::identity(3), 1);
  const PeriodicFactorization pf = periodic_meta_factorize(in.a, in.basis, gen);
  const core::MetaFactorization mf = core::meta_factorize(in.a, in.basis, {in.basis.f, in.basis.h});
  EXPECT_LE(testing::rel_diff(pf.meta.g, mf.g), 1e-11);
  EXPECT_LE(pf.meta.report.residual_rel, 1e-11);
  EXPECT_LE(pf.meta.report.idem_defect_p, 1e-12);
}

TEST(PeriodicMeta, SwapOnRankTwo) {
  const Matrix a = random_rank_k(8, 6, 2, 4);
  const core::BasisPair basis = svd_basis(a, 2);
  const Matrix swap = make_cyclic_generator(2, 2, GeneratorKind::Shift);
  const PeriodicGenerators gen(swap, swap, 2);
  const PeriodicFactorization pf = periodic_meta_factorize(a, basis, gen);

  // One application is twisted, two restore a.
  EXPECT_GT(pf.meta.report.residual_rel, 1e-3);
  const PeriodicityReport rep = verify_periodicity(a, basis, pf.pair, gen, 1);
  EXPECT_LE(rep.powers[2].residual_rel, 1e-9);

  const Matrix g1 = transpose_times(basis.f, a * kernels::pinv(basis.h.transpose()));
  EXPECT_LE(testing::rel_diff(pf.meta.g, swap * g1 * swap), 1e-12);
}

TEST(PeriodicMeta, RejectsRankDeficientBasis) {
  const Matrix a = random_rank_k(8, 6, 2, 4);
  core::BasisPair basis = svd_basis(a, 2);
  basis.f.set_col(1, basis.f.col(0));
  const PeriodicGenerators gen(Matrix::identity(2), Matrix::identity(2), 1);
  EXPECT_EQ(kind_of([&] { periodic_meta_factorize(a, basis, gen); }), ErrorKind::RankDeficientAnchor);
  EXPECT_EQ(kind_of([&] { periodic_meta_factorize(a, svd_basis(a, 1), gen); }), ErrorKind::DimensionMismatch);
}

TEST(PeriodicMeta, ProjectorPowersMatchOrthogonalProjectors) {
  std::uint64_t seed = 0;
  for (GeneratorKind kind : {GeneratorKind::Shift, GeneratorKind::Rotation}) {
    for (Index n : {2, 3, 4, 6}) {
      const Index k = kind == GeneratorKind::Shift ? (n <= 4 ? n : 6) : 2 * (1 + seed % 4);
      const Instance in = random_instance(20, 15, k, 10 + seed++);
      const Matrix z_c = make_cyclic_generator(k, n, kind);
      const Matrix z_r = make_cyclic_generator(k, n, kind).transpose();
      const PeriodicGenerators gen(z_c, z_r, n);
      const PeriodicFactorization pf = periodic_meta_factorize(in.a, in.basis, gen);
      const PowerDefects d = projector_power_defects(in.basis, pf.pair, n);
      EXPECT_LE(d.column, 1e-9) << kind_name(kind) << " N=" << n;
      EXPECT_LE(d.row, 1e-9) << kind_name(kind) << " N=" << n;
      const PeriodicityReport rep = verify_periodicity(in.a, in.basis, pf.pair, gen, 4);
      EXPECT_TRUE(rep.holds) << rep.max_period_residual;
    }
  }
}

TEST(VerifyPeriodicity, ReportsEveryPower) {
  const Instance in = random_instance(12, 9, 4, 3);
  const Matrix z = make_cyclic_generator(4, 2, GeneratorKind::Shift);
  const PeriodicGenerators gen(z, z, 2);
  const PeriodicFactorization pf = periodic_meta_factorize(in.a, in.basis, gen);
  const PeriodicityReport rep = verify_periodicity(in.a, in.basis, pf.pair, gen, 3);
  ASSERT_EQ(rep.powers.size(), 7u);
  EXPECT_EQ(rep.powers[0].residual_rel, 0.0);
  for (const PowerResidual& p : rep.powers) {
    EXPECT_EQ(p.multiple_of_period, p.power % 2 == 0);
    if (p.multiple_of_period) {
      EXPECT_LE(p.residual_rel, 1e-9);
    } else {
      EXPECT_GT(p.residual_rel, 1e-3);
    }
  }
  EXPECT_TRUE(rep.holds);
}

}  // namespace
}  // namespace metafact::periodic
