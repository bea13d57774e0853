#include <gtest/gtest.h>

#include "mrqc/calibration.hpp"

using namespace mrqc;

namespace {

const Executor& ideal() {
  static const Executor ex(default_device(), {CoherenceFlags::none()});
  return ex;
}

}  // namespace

TEST(CalibrateTheta, IdealSweepFindsClosedFormPhase) {
  const double g = ideal().device().g();
  for (double phi : {kPi, kPi / 2, kPi / 4, -kPi / 2}) {
    const auto s = calibrate_theta(phi, ideal(), 0, 32);
    EXPECT_LT(std::abs(phase_distance(s.optimum, solve_cphi(phi, g).theta)), 1e-3) << phi;
    EXPECT_LT(s.fit.max_residual, 1e-10);
    EXPECT_NEAR(s.fit(s.optimum), 1.0, 1e-9);
  }
}

TEST(CalibrateTheta, DecoherenceKeepsTheOptimum) {
  const Executor ex(default_device());
  const auto s = calibrate_theta(kPi, ex, 0, 16);
  EXPECT_LT(std::abs(phase_distance(s.optimum, solve_cphi(kPi, ex.device().g()).theta)), 0.02);
  EXPECT_LT(s.fit(s.optimum), 0.99);
}

TEST(CalibrateHadamard, IdealPhasesMatchLedger) {
  CompileOptions o;
  const auto c = calibrate_hadamard_phases(ideal(), o, 3, 12);
  ASSERT_EQ(c.phases.size(), 3u);
  for (size_t k = 0; k < 3; ++k) {
    EXPECT_LT(std::abs(phase_distance(c.phases[k], c.ledger_phases[k])), 1e-3) << k;
    EXPECT_NEAR(c.sweeps[k].fit(c.phases[k]), 0.0, 1e-9);
    EXPECT_LT(c.sweeps[k].fit.max_residual, 1e-9);
  }
}

TEST(CalibrateCnot, IdealPhaseMatchesLedger) {
  for (int mode : {0, 1}) {
    const auto c = calibrate_cnot_phase(ideal(), CompileOptions{}, mode, 12);
    EXPECT_LT(std::abs(phase_distance(c.phase, c.ledger_phase)), 1e-3) << mode;
    EXPECT_NEAR(c.sweep.fit(c.phase), 0.0, 1e-9);
  }
}

TEST(Ramsey, RecoversModeOffsets) {
  const auto r3 = ramsey_phonon_frequency(ideal(), 2);
  EXPECT_NEAR(r3.frequency_hz, 7e6, 1e3);
  const auto r1 = ramsey_phonon_frequency(ideal(), 0);
  EXPECT_NEAR(r1.frequency_hz, 31e6, 1e3);
}

TEST(Ramsey, ZeroDetuningModeIsAFitFailure) {
  DeviceParams dev = default_device();
  dev.modes[0].frequency_hz = dev.rest_frequency_hz;
  const Executor ex(dev, {CoherenceFlags::none()});
  std::vector<double> waits;
  for (int k = 0; k < 200; ++k) waits.push_back(1e-8 * k);
  EXPECT_THROW(ramsey_phonon_frequency(ex, 0, waits), FitError);
}
