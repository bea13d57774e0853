#include <gtest/gtest.h>

#include "mrqc/device.hpp"

using namespace mrqc;

namespace {

DeviceParams single_mode_device(double mode_hz) {
  DeviceParams p = default_device();
  p.modes = {p.modes[0]};
  p.modes[0].frequency_hz = mode_hz;
  return p;
}

}  // namespace

TEST(DeviceFile, DefaultCarriesTableValues) {
  const DeviceParams p = default_device();
  EXPECT_DOUBLE_EQ(p.g_hz, 296e3);
  EXPECT_DOUBLE_EQ(p.rest_frequency_hz, 5.057e9);
  EXPECT_DOUBLE_EQ(p.transmon_t1, 30e-6);
  EXPECT_DOUBLE_EQ(p.transmon_t2, 23e-6);
  ASSERT_EQ(p.num_modes(), 3);
  EXPECT_DOUBLE_EQ(p.modes[0].frequency_hz, 5.088e9);
  EXPECT_DOUBLE_EQ(p.modes[1].t1, 137e-6);
  EXPECT_DOUBLE_EQ(p.modes[2].t2, 127e-6);
  for (const auto& m : p.modes) EXPECT_EQ(m.truncation, 3);
}

TEST(DeviceFile, JsonRoundTrip) {
  const DeviceParams p = default_device();
  const nlohmann::json j = p;
  const DeviceParams q = parse_device(j.dump());
  EXPECT_EQ(nlohmann::json(q), j);
}

TEST(DeviceFile, RejectsNonPhysicalParameters) {
  DeviceParams p = default_device();
  p.transmon_t2 = 61e-6;
  EXPECT_THROW(p.validate(), CalibrationError);
  p = default_device();
  p.modes[1].frequency_hz = p.rest_frequency_hz - 1e6;
  EXPECT_THROW(p.validate(), CalibrationError);
  p = default_device();
  p.modes[0].truncation = 2;
  EXPECT_THROW(p.validate(), CalibrationError);
  p = default_device();
  p.g_hz = 0.0;
  EXPECT_THROW(p.validate(), CalibrationError);
  EXPECT_THROW(parse_device("{\"g_hz\": 1}"), CalibrationError);
  EXPECT_THROW(p.mode(7), DimensionError);
}

TEST(JcHamiltonian, ResonantBlockIsPureCoupling) {
  const DeviceParams p = default_device();
  const auto h = build_jc_hamiltonian(p, {0}, p.modes[0].frequency_hz);
  const int T = 3;
  const int e0 = 1 * T + 0, g1 = 0 * T + 1;
  const double g = p.g();
  EXPECT_NEAR(std::abs(h.drift.entries(e0, e0)), 0.0, 1e-9);
  EXPECT_NEAR(std::abs(h.drift.entries(g1, g1)), 0.0, 1e-9);
  EXPECT_NEAR(h.drift.entries(e0, g1).real(), g, 1e-9);
  EXPECT_NEAR(h.drift.entries(g1, e0).real(), g, 1e-9);
}

TEST(JcHamiltonian, DetunedBlockEigenvalues) {
  const DeviceParams p = default_device();
  const double g = p.g();
  const double delta_hz = 0.7e6;
  const auto h = build_jc_hamiltonian(p, {0}, p.modes[0].frequency_hz + delta_hz);
  const double delta = kTwoPi * delta_hz;
  CMatrix block(2, 2);
  block << h.drift.entries(3, 3), h.drift.entries(3, 1), h.drift.entries(1, 3), h.drift.entries(1, 1);
  block -= 0.5 * block.trace() * CMatrix::Identity(2, 2);
  Eigen::SelfAdjointEigenSolver<CMatrix> es(block);
  const double expected = 0.5 * std::sqrt(delta * delta + 4.0 * g * g);
  EXPECT_NEAR(es.eigenvalues()(1), expected, 1e-6 * expected);
  EXPECT_NEAR(es.eigenvalues()(0), -expected, 1e-6 * expected);
}

TEST(JcHamiltonian, TwoModesCarryBothDetunings) {
  const DeviceParams p = default_device();
  const auto h = build_jc_hamiltonian(p, {0, 1}, p.rest_frequency_hz);
  ASSERT_EQ(h.detunings.size(), 2u);
  EXPECT_NEAR(h.detunings[0], -kTwoPi * 31e6, 1.0);
  EXPECT_NEAR(h.detunings[1], -kTwoPi * 19e6, 1.0);
  const CMatrix rest = h.rest_frame_drift();
  // |g,1,0> and |g,0,1> sit at the mode offsets above the rest point.
  EXPECT_NEAR(rest(3, 3).real(), kTwoPi * 31e6, 1.0);
  EXPECT_NEAR(rest(1, 1).real(), kTwoPi * 19e6, 1.0);
}

TEST(JcHamiltonian, HermitianAndConservesExcitations) {
  const DeviceParams p = default_device();
  for (double f : {5.05e9, 5.07e9, 5.09e9}) {
    const auto h = build_jc_hamiltonian(p, {0, 1, 2}, f);
    EXPECT_LT(hermiticity_error(h.drift.entries), 1e-12);
    const CMatrix n = h.excitation_number();
    const CMatrix comm = n * h.drift.entries - h.drift.entries * n;
    EXPECT_LT(comm.cwiseAbs().maxCoeff(), 1e-12 * h.drift.entries.cwiseAbs().maxCoeff());
  }
  EXPECT_THROW(build_jc_hamiltonian(p, {}, 5e9), DimensionError);
  EXPECT_THROW(build_jc_hamiltonian(p, {5}, 5e9), DimensionError);
}

TEST(Collapse, DephasingRates) {
  EXPECT_NEAR(pure_dephasing_rate(30.0, 23.0), 1.0 / 23.0 - 1.0 / 60.0, 1e-15);
  EXPECT_NEAR(pure_dephasing_rate(30.0, 23.0), 0.026811594, 1e-8);
  EXPECT_NEAR(pure_dephasing_rate(196.0, 368.0), 1.6638e-4, 1e-7);
  EXPECT_EQ(pure_dephasing_rate(10.0, 20.0), 0.0);
  EXPECT_THROW(pure_dephasing_rate(10.0, 21.0), CalibrationError);
}

TEST(Collapse, OperatorsPerSubsystem) {
  const DeviceParams p = default_device();
  const auto ls = collapse_operators(p, {0, 2});
  ASSERT_EQ(ls.size(), 6u);
  for (const auto& c : ls) {
    EXPECT_GE(c.rate, 0.0);
    EXPECT_EQ(c.op.dim(), 18);
  }
  EXPECT_NEAR(ls[0].rate, 1.0 / 30e-6, 1e-6);
  EXPECT_EQ(ls[3].subsystem, 1);
  // Coherence-rate convention: L = sqrt(2 gamma_phi) n.
  const double gphi = pure_dephasing_rate(p.transmon_t1, p.transmon_t2);
  EXPECT_NEAR(ls[1].op.entries.cwiseAbs().maxCoeff(), std::sqrt(2.0 * gphi), 1e-9);
  EXPECT_EQ(collapse_operators(p, {0}, CoherenceFlags{false, true}).size(), 2u);
  EXPECT_TRUE(collapse_operators(p, {0}, CoherenceFlags::none()).empty());
}

TEST(DispersiveDetuning, InvertsDressedSplitting) {
  const double g = 1.7;
  EXPECT_NEAR(dispersive_detuning(2.0 * g, g), 0.0, 1e-12);
  EXPECT_NEAR(dispersive_detuning(std::sqrt(8.0) * g, g), 2.0 * g, 1e-12);
  EXPECT_NEAR(dispersive_detuning(-std::sqrt(8.0) * g, g), -2.0 * g, 1e-12);
  EXPECT_THROW(dispersive_detuning(1.9 * g, g), CalibrationError);
}

TEST(AuxiliaryMode, SitsAboveAllModes) {
  const DeviceParams p = single_mode_device(5.1e9);
  const ModeSpec aux = p.auxiliary_mode();
  EXPECT_GT(aux.frequency_hz, 5.1e9);
  EXPECT_EQ(aux.truncation, 3);
  EXPECT_GT(aux.t1, 0.0);
}
