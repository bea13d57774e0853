#include <gtest/gtest.h>

#include <set>

#include "mrqc/benchmarking.hpp"

using namespace mrqc;

namespace {

CMatrix conjugate_pauli(const CMatrix& u, const CMatrix& p) { return u * p * u.adjoint(); }

}  // namespace

TEST(CliffordTable, HasTwentyFourDistinctNormalizedGates) {
  const auto& t = clifford_table();
  ASSERT_EQ(t.size(), 24u);
  for (const auto& g : t) EXPECT_NEAR(std::hypot(g.axis[0], g.axis[1], g.axis[2]), 1.0, 1e-15);
  for (size_t a = 0; a < t.size(); ++a)
    for (size_t b = a + 1; b < t.size(); ++b) EXPECT_FALSE(equal_up_to_phase(t[a].matrix, t[b].matrix)) << a << " " << b;
  EXPECT_TRUE(equal_up_to_phase(t[0].matrix, CMatrix::Identity(2, 2)));
}

TEST(CliffordTable, ClosedUnderComposition) {
  const auto& grp = clifford_group();
  int checks = 0;
  for (int a = 0; a < 24; ++a)
    for (int b = 0; b < 24; ++b) {
      const int k = grp.product(a, b);
      ASSERT_GE(k, 0);
      EXPECT_TRUE(equal_up_to_phase(grp.gate(a).matrix * grp.gate(b).matrix, grp.gate(k).matrix));
      ++checks;
    }
  EXPECT_EQ(checks, 576);
  for (int a = 0; a < 24; ++a) EXPECT_EQ(grp.product(a, grp.inverse(a)), 0);
}

TEST(CliffordTable, ThirdTurnCyclesPaulis) {
  const CMatrix u = ops::rotation(normalized_axis({1, 1, 1}), 2.0 * kPi / 3.0);
  EXPECT_LT((conjugate_pauli(u, ops::pauli_x()) - ops::pauli_y()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((conjugate_pauli(u, ops::pauli_y()) - ops::pauli_z()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((conjugate_pauli(u, ops::pauli_z()) - ops::pauli_x()).cwiseAbs().maxCoeff(), 1e-12);
  CMatrix h(2, 2);
  h << 1, 1, 1, -1;
  EXPECT_TRUE(equal_up_to_phase(ops::rotation(normalized_axis({1, 0, 1}), kPi), h / std::sqrt(2.0)));
  EXPECT_GE(clifford_group().lookup(h / std::sqrt(2.0)), 0);
}

TEST(RBSequence, RecoveryInvertsTheProduct) {
  std::mt19937_64 rng(3);
  const auto& grp = clifford_group();
  for (int n : {1, 2, 5, 40}) {
    for (int trial = 0; trial < 10; ++trial) {
      const auto s = sample_rb_sequence(n, rng);
      EXPECT_EQ(static_cast<int>(s.gates.size()), n);
      CMatrix u = CMatrix::Identity(2, 2);
      for (int k : s.executed()) u = grp.gate(k).matrix * u;
      EXPECT_TRUE(equal_up_to_phase(u, CMatrix::Identity(2, 2), 1e-12));
    }
  }
  const auto one = sample_rb_sequence(1, std::uint64_t{5});
  EXPECT_EQ(grp.product(one.recovery, one.gates[0]), 0);
  EXPECT_EQ(sample_rb_sequence(10, std::uint64_t{9}).gates, sample_rb_sequence(10, std::uint64_t{9}).gates);
  EXPECT_THROW(sample_rb_sequence(0, std::uint64_t{1}), DomainError);
}

TEST(RunRB, IdealSurvivalIsOne) {
  const Executor ex(default_device(), {CoherenceFlags::none()});
  RBOptions o;
  o.lengths = {1, 2, 5, 10};
  o.seeds = 5;
  o.pulse_duration = 50e-9;
  for (int target : {kTransmon, 0, 2}) {
    const auto curve = run_rb(ex, {target}, o);
    for (double m : curve.mean) EXPECT_NEAR(m, 1.0, 1e-10) << target;
    EXPECT_DOUBLE_EQ(fit_rb(curve).F, 1.0);
  }
}

TEST(RunRB, PhononVariantDecaysFasterThanTransmon) {
  const Executor ex(default_device());
  RBOptions o;
  o.lengths = {1, 2, 3, 5, 7, 10};
  o.seeds = 8;
  o.pulse_duration = 50e-9;
  const auto ft = fit_rb(run_rb(ex, {kTransmon}, o));
  const auto fp = fit_rb(run_rb(ex, {0}, o));
  EXPECT_LT(ft.F, 1.0);
  EXPECT_LT(fp.F, ft.F);
}

TEST(FitRB, RecoversPlantedDecay) {
  RBCurve c;
  for (int n : {1, 2, 3, 5, 7, 10, 15, 20, 30, 40}) {
    c.lengths.push_back(n);
    c.mean.push_back(0.5 * std::pow(0.95, n) + 0.5);
  }
  const auto f = fit_rb(c);
  EXPECT_NEAR(f.p, 0.95, 0.002);
  EXPECT_NEAR(f.F, 0.975, 0.001);
  c.lengths.resize(3);
  c.mean.resize(3);
  EXPECT_THROW(fit_rb(c), FitError);
}
