#pragma once
// Simulated calibration sweeps: the C_phi mid-sequence phase, per-Hadamard
// reference phases inside the QFT, the CNOT second-pulse phase, and the
// Ramsey measurement of a phonon mode's frequency.

#include <string>
#include <vector>

#include "mrqc/analysis.hpp"
#include "mrqc/compiler.hpp"
#include "mrqc/execution.hpp"
#include "mrqc/gates.hpp"
#include "mrqc/simulator.hpp"

namespace mrqc {

/// A one-parameter sweep of an excited-state population.
struct PhaseSweep {
  std::vector<double> x;
  std::vector<double> population;
  HarmonicFit fit;
  double optimum = 0.0;
};

inline std::vector<double> phase_grid(int points) {
  if (points < 3) throw DomainError("phase sweep needs at least 3 points");
  std::vector<double> x(static_cast<size_t>(points));
  for (int k = 0; k < points; ++k) x[static_cast<size_t>(k)] = kTwoPi * k / points;
  return x;
}

namespace detail {

template <class F>
PhaseSweep sweep_phase(int points, bool maximize, F&& population_at, const char* what) {
  PhaseSweep s;
  s.x = phase_grid(points);
  for (double x : s.x) s.population.push_back(population_at(x));
  s.fit = fit_first_harmonic(s.x, s.population);
  if (s.fit.amplitude() < 1e-9) throw FitError(std::string(what) + ": flat sweep, no extremum");
  s.optimum = maximize ? s.fit.argmax() : s.fit.argmin();
  return s;
}

inline CMatrix excited_qubit() {
  CMatrix e = CMatrix::Zero(2, 2);
  e(1, 1) = 1.0;
  return e;
}

inline CMatrix ground_qubit() {
  CMatrix g = CMatrix::Zero(2, 2);
  g(0, 0) = 1.0;
  return g;
}

}  // namespace detail

/// Sweeps the mid-sequence Z phase of C_phi with |e0> as input and returns the
/// phase at which the transmon comes back to |e>.
inline PhaseSweep calibrate_theta(double phi, const Executor& ex, int mode = 0, int points = 64,
                                  double pulse_duration = 0.0) {
  const CPhiParams p = solve_cphi(phi, ex.device().g());
  const double off = ex.mode_offset(mode);
  return detail::sweep_phase(points, true, [&](double theta) {
    SimState st = ex.product_state({mode}, detail::excited_qubit(), {detail::ground_qubit()});
    ex.run(st, cphi_segments(p, mode, off, pulse_duration, theta));
    return transmon_excited_population(st);
  }, "calibrate_theta");
}

struct HadamardCalibration {
  std::vector<double> phases;         // calibrated reference phase per Hadamard
  std::vector<double> ledger_phases;  // frame-ledger prediction per Hadamard
  std::vector<PhaseSweep> sweeps;
};

/// Circuit preparing |+>^n and running the QFT up to and including its k-th
/// Hadamard, followed by a z readout of that qubit. Without `with_prepare` the
/// |+> inputs are expected to be loaded directly into the modes.
inline LogicalCircuit hadamard_checkpoint_circuit(int n, int k, bool with_prepare = true) {
  LogicalCircuit c(n);
  if (with_prepare)
    for (int q = 0; q < n; ++q) c.prepare(q, PrepLabel::plus);
  int seen = 0;
  for (const auto& g : build_qft(n, false).gates) {
    c.gates.push_back(g);
    if (g.type == GateType::hadamard && seen++ == k) {
      c.measure(g.q);
      return c;
    }
  }
  throw DomainError("hadamard_checkpoint_circuit: k out of range");
}

/// Calibrates the QFT Hadamards one after another. Each checkpoint input is
/// |+>, which a correctly phased Hadamard maps to |0>, so the sweep minimizes
/// the measured |1> probability. Phases are absolute pulse phases, so the
/// preparation must match the one the calibrated circuit will use.
inline HadamardCalibration calibrate_hadamard_phases(const Executor& ex, CompileOptions opts, int n = 3, int points = 16,
                                                     bool ideal_prep = false) {
  HadamardCalibration out;
  opts.hadamard_phase.clear();
  const std::vector<PrepLabel> plus(static_cast<size_t>(n), PrepLabel::plus);
  for (int k = 0; k < n; ++k) {
    const LogicalCircuit c = hadamard_checkpoint_circuit(n, k, !ideal_prep);
    out.ledger_phases.push_back(compile(c, ex.device(), opts).ledger_hadamard_phases.at(static_cast<size_t>(k)));
    auto sweep = detail::sweep_phase(points, false, [&](double phase) {
      CompileOptions o = opts;
      o.hadamard_phase[k] = phase;
      const CompiledSchedule s = compile(c, ex.device(), o);
      SimState st = ideal_prep ? prepared_state(ex, c.home, s.initial_modes, plus) : ex.ground_state(s.initial_modes);
      ex.run(st, s.segments);
      return last_outcome_one(st);
    }, "calibrate_hadamard_phases");
    opts.hadamard_phase[k] = sweep.optimum;
    out.phases.push_back(sweep.optimum);
    out.sweeps.push_back(std::move(sweep));
  }
  return out;
}

struct CnotCalibration {
  double phase = 0.0;
  double ledger_phase = 0.0;
  PhaseSweep sweep;
};

/// Sweeps the CNOT's second-pulse phase with the control phonon in |0>; the
/// calibrated phase returns the transmon target to |g>.
inline CnotCalibration calibrate_cnot_phase(const Executor& ex, CompileOptions opts, int control_mode = 0,
                                            int points = 16) {
  LogicalCircuit c(2);
  c.home = {control_mode, kTransmon};
  c.oracle_cnot(0, 1);
  c.measure(1);
  opts.cnot_phase.clear();
  CnotCalibration out;
  out.ledger_phase = compile(c, ex.device(), opts).cnot_phases.at(0);
  out.sweep = detail::sweep_phase(points, false, [&](double phase) {
    CompileOptions o = opts;
    o.cnot_phase[0] = phase;
    return last_outcome_one(run_schedule(ex, compile(c, ex.device(), o)));
  }, "calibrate_cnot_phase");
  out.phase = out.sweep.optimum;
  return out;
}

struct RamseyResult {
  double frequency_hz = 0.0;
  CosineFit fit;
  std::vector<double> waits;
  std::vector<double> population;
};

inline std::vector<double> default_ramsey_waits() {
  std::vector<double> w;
  for (int k = 0; k <= 1000; ++k) w.push_back(2e-9 * k);
  return w;
}

/// pi/2, swap into `mode`, wait, swap back, pi/2. The transmon population
/// oscillates at the mode's offset from the rest point.
inline RamseyResult ramsey_phonon_frequency(const Executor& ex, int mode,
                                            const std::vector<double>& waits = default_ramsey_waits()) {
  RamseyResult r;
  r.waits = waits;
  const double g = ex.device().g();
  for (double t : waits) {
    SimState st = ex.ground_state({mode});
    ex.run(st, {rotation_segment({1, 0, 0}, kPi / 2.0), swap_segment(mode, g), idle_segment(t), swap_segment(mode, g),
                rotation_segment({1, 0, 0}, kPi / 2.0)});
    r.population.push_back(transmon_excited_population(st));
  }
  r.fit = fit_damped_cosine(waits, r.population);
  r.frequency_hz = r.fit.frequency;
  return r;
}

}  // namespace mrqc
