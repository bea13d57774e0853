#include <gtest/gtest.h>

#include "mrqc/gates.hpp"
#include "mrqc/simulator.hpp"

using namespace mrqc;

namespace {

constexpr double kG = kTwoPi * 296e3;

CMatrix ideal_block(double phi) {
  const auto p = solve_cphi(phi, kG);
  return computational_block(cphi_sequence_unitary(p, kG).entries, 3);
}

CMatrix product(const std::vector<GateSegment>& segs) {
  CMatrix u = CMatrix::Identity(2, 2);
  for (const auto& s : segs) u = segment_rotation_matrix(s) * u;
  return u;
}

bool equal_up_to_phase(const CMatrix& a, const CMatrix& b, double tol) {
  const cplx overlap = (b.adjoint() * a).trace() / static_cast<double>(a.rows());
  return std::abs(std::abs(overlap) - 1.0) < tol;
}

}  // namespace

TEST(SolveCphi, PiCase) {
  const auto p = solve_cphi(kPi, kG);
  EXPECT_NEAR(p.delta / kG, -2.0 * std::sqrt(2.0) / std::sqrt(3.0), 1e-12);
  EXPECT_NEAR(p.delta / kG, -1.63299, 1e-5);
  EXPECT_NEAR(p.t_int, kTwoPi / (kG * std::sqrt(32.0 / 3.0)), 1e-18);
  EXPECT_NEAR(p.theta, 2.2323409, 1e-6);
  EXPECT_NEAR(p.theta, 2.2297, 5e-3);
  EXPECT_NEAR(p.delta / std::sqrt(p.delta * p.delta + 8 * kG * kG), 0.5 - 1.0, 1e-12);
}

TEST(SolveCphi, HalfPiCase) {
  const auto p = solve_cphi(kPi / 2.0, kG);
  EXPECT_NEAR(p.delta / kG, -3.2071, 1e-4);
  EXPECT_NEAR(p.delta / std::sqrt(p.delta * p.delta + 8 * kG * kG), -0.75, 1e-12);
}

TEST(SolveCphi, SmallPhiDivergesAndDomainChecked) {
  EXPECT_GT(std::abs(solve_cphi(1e-3, kG).delta), 100.0 * kG);
  EXPECT_GT(std::abs(solve_cphi(0.01, kG).delta), std::abs(solve_cphi(0.1, kG).delta));
  EXPECT_THROW(solve_cphi(0.0, kG), DomainError);
  EXPECT_THROW(solve_cphi(kTwoPi, kG), DomainError);
  EXPECT_THROW(solve_cphi(-7.0, kG), DomainError);
}

TEST(SolveCphi, OddSymmetry) {
  for (int k = 1; k <= 15; ++k) {
    const auto a = solve_cphi(k * kPi / 8, kG), b = solve_cphi(-k * kPi / 8, kG);
    EXPECT_NEAR(a.delta, -b.delta, 1e-9 * std::abs(a.delta));
    EXPECT_NEAR(a.t_int, b.t_int, 1e-20);
    EXPECT_NEAR(std::abs(phase_distance(a.theta, -b.theta)), 0.0, 1e-9);
    EXPECT_LT(a.delta, 0.0);
  }
}

TEST(CphiClosure, DiagonalWithTargetPhaseOnGrid) {
  for (int k = -15; k <= 15; ++k) {
    if (k == 0) continue;
    const double phi = k * kPi / 8;
    const CMatrix b = ideal_block(phi);
    EXPECT_LT(offdiagonal_mass(b), 1e-9) << "k=" << k;
    EXPECT_LT(std::abs(phase_distance(controlled_phase_of(b), phi)), 1e-9) << "k=" << k;
  }
}

TEST(CphiClosure, ByProductPhasesMatchClosedForm) {
  for (int k : {-7, -2, 1, 4, 8, 13}) {
    const auto p = solve_cphi(k * kPi / 8, kG);
    const CMatrix b = ideal_block(p.phi);
    const CMatrix ideal = cphi_ideal_unitary(p).entries;
    EXPECT_NEAR(std::abs(b(0, 0) - 1.0), 0.0, 1e-12);
    for (int i = 0; i < 4; ++i) EXPECT_NEAR(std::abs(b(i, i) - ideal(i, i)), 0.0, 1e-9) << k << " " << i;
  }
}

TEST(CphiClosure, TwoExcitationBlockDiagonalAtInteractionTime) {
  for (int k = 1; k <= 15; ++k) {
    const auto p = solve_cphi(k * kPi / 8, kG);
    const CMatrix u = assemble_offres_unitary(SpaceLayout({2, 3}), p.delta, kG, p.t_int).entries;
    EXPECT_LT(std::abs(u(jc_index(3, 1, 1), jc_index(3, 0, 2))), 1e-12);
  }
}

TEST(Durations, SwapAndRatio) {
  EXPECT_NEAR(swap_duration(kG), 1.0 / (4.0 * 296e3), 1e-15);
  EXPECT_NEAR(swap_duration(kG) * 1e9, 844.6, 0.05);
  const double ratio = 2.0 * solve_cphi(kPi, kG).t_int / swap_duration(kG);
  EXPECT_NEAR(ratio, 2.449, 0.01);
  EXPECT_NEAR(ratio, std::sqrt(6.0), 1e-12);
}

TEST(Rotations, HadamardDecomposition) {
  CMatrix h(2, 2);
  h << 1, 1, 1, -1;
  h /= std::sqrt(2.0);
  const CMatrix hh = product(hadamard());
  EXPECT_TRUE(equal_up_to_phase(hh, h, 1e-12));
  EXPECT_TRUE(equal_up_to_phase(hh * hh, CMatrix::Identity(2, 2), 1e-12));
  CVector plus(2);
  plus << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  EXPECT_NEAR(std::abs((hh * plus)(0)), 1.0, 1e-12);
  EXPECT_THROW(rotation_segment({0, 0, 0}, 1.0), DomainError);
}

TEST(Rotations, FramePhaseRotatesAxis) {
  const double lambda = 0.83;
  CMatrix z = CMatrix::Identity(2, 2);
  z(1, 1) = std::exp(kI * lambda);
  const CMatrix logical = ops::rotation({0.3, -0.5, 0.2}, 1.1);
  const auto seg = rotation_segment(rotate_axis_z(normalized_axis({0.3, -0.5, 0.2}), lambda), 1.1);
  EXPECT_LT((segment_rotation_matrix(seg) * z - z * logical).cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Rotations, PhysicalZFromTwoPiPulses) {
  for (double a : {0.4, -2.2, 3.0}) {
    const CMatrix expected = ops::rotation({0, 0, 1}, a);
    EXPECT_TRUE(equal_up_to_phase(product(physical_z(a, 50e-9)), expected, 1e-12));
    EXPECT_TRUE(equal_up_to_phase(product(physical_z(a, 0.0)), expected, 1e-12));
  }
}

TEST(Segments, SwapTwiceReturnsExcitation) {
  DeviceParams dev = default_device();
  Executor ex(dev, {CoherenceFlags::none()});
  auto s = ex.product_state({0}, []{ CMatrix e = CMatrix::Zero(2, 2); e(1, 1) = 1; return e; }(),
                            {[]{ CMatrix g = CMatrix::Zero(2, 2); g(0, 0) = 1; return g; }()});
  ex.run(s, {swap_segment(0, dev.g())});
  EXPECT_NEAR(s.branches[0].rho(jc_index(3, 0, 1), jc_index(3, 0, 1)).real(), 1.0, 1e-10);
  ex.run(s, {swap_segment(0, dev.g())});
  EXPECT_NEAR(s.branches[0].rho(jc_index(3, 1, 0), jc_index(3, 1, 0)).real(), 1.0, 1e-10);
}

TEST(Segments, CnotTruthTable) {
  DeviceParams dev = default_device();
  Executor ex(dev, {CoherenceFlags::none()});
  const int mode = 0;
  const auto p = solve_cphi(kPi, dev.g());
  // Transmon frame phase after C_pi: phi_e0 minus the rest-frame precession.
  const double lambda = p.phi_e0 - dev.mode_offset(mode) * cphi_duration(p);
  const auto seq = cnot_sequence(dev.g(), mode, dev.mode_offset(mode), lambda);
  const CMatrix u = ex.schedule_unitary({mode}, seq);
  // |g0> -> |g0>, |g1> -> |e1>, up to phases.
  EXPECT_NEAR(std::abs(u(jc_index(3, 0, 0), jc_index(3, 0, 0))), 1.0, 1e-9);
  EXPECT_NEAR(std::abs(u(jc_index(3, 1, 1), jc_index(3, 0, 1))), 1.0, 1e-9);
  EXPECT_NEAR(std::abs(u(jc_index(3, 0, 1), jc_index(3, 1, 1))), 1.0, 1e-9);
}
