// Walks through one controlled-phase gate on the default device: closed-form
// parameters, the ideal sequence, the theta calibration sweep, and a
// simulated process tomography with and without decoherence.

#include <cstdio>
#include <cstdlib>

#include "mrqc/mrqc.hpp"

using namespace mrqc;

int main(int argc, char** argv) {
  const double phi = argc > 1 ? std::atof(argv[1]) : kPi;
  const DeviceParams dev = default_device();
  const double g = dev.g();

  const CPhiParams p = solve_cphi(phi, g);
  std::printf("phi = %.6f rad\n", phi);
  std::printf("  detuning   %.4f g  (%.1f kHz)\n", p.delta / g, p.delta / kTwoPi / 1e3);
  std::printf("  t_int      %.1f ns  (swap %.1f ns, ratio 2 t_int / t_swap = %.4f)\n", p.t_int * 1e9,
              swap_duration(g) * 1e9, 2.0 * p.t_int / swap_duration(g));
  std::printf("  theta      %.6f rad\n", p.theta);

  const CMatrix block = computational_block(cphi_sequence_unitary(p, g).entries, 3);
  std::printf("ideal sequence: off-diagonal mass %.2e, controlled phase %.6f\n", offdiagonal_mass(block),
              controlled_phase_of(block));

  const Executor noisy(dev, {CoherenceFlags::full()});
  const PhaseSweep sweep = calibrate_theta(phi, noisy, 0, 64, 50e-9);
  std::printf("theta sweep with decoherence: optimum %.4f rad (closed form %.4f)\n", sweep.optimum, p.theta);

  for (auto d : {DecoherenceMode::none, DecoherenceMode::full}) {
    ExperimentConfig c;
    c.experiment = "cphi-tomo";
    c.phi = phi;
    c.decoherence = d;
    c.spam = SpamMode::none;
    const ResultBundle b = run(c);
    std::printf("process tomography, decoherence %-5s: fidelity %.4f (before local phase compensation %.4f)\n",
                decoherence_name(d), b.summary["fidelity"].get<double>(), b.summary["raw_fidelity"].get<double>());
  }
  return 0;
}
