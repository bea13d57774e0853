// Acceptance report: one PASS/FAIL line per criterion, exit status 1 if any
// criterion fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include "mrqc/mrqc.hpp"

using namespace mrqc;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

std::string pct(double x) { return fmt("%.2f%%", 100.0 * x); }

bool within(double x, double lo, double hi) { return x >= lo && x <= hi; }

CMatrix jc_hamiltonian(const SpaceLayout& l, double delta, double g) {
  const CMatrix sp = embed(l, 0, ops::annihilation(2).adjoint());
  const CMatrix a = embed(l, 1, ops::annihilation(l.factor(1)));
  return delta * embed(l, 0, ops::number(2)) + g * (sp * a + sp.adjoint() * a.adjoint());
}

// Schroedinger equation for the full propagator, classical RK4.
CMatrix rk4_propagator(const CMatrix& h, double t, int steps) {
  const double dt = t / steps;
  const CMatrix a = -kI * h;
  CMatrix u = CMatrix::Identity(h.rows(), h.cols());
  for (int s = 0; s < steps; ++s) {
    const CMatrix k1 = a * u;
    const CMatrix k2 = a * (u + 0.5 * dt * k1);
    const CMatrix k3 = a * (u + 0.5 * dt * k2);
    const CMatrix k4 = a * (u + dt * k3);
    u += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return u;
}

CMatrix random_unitary(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  CMatrix z(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) z(i, j) = cplx(n(rng), n(rng));
  return Eigen::HouseholderQR<CMatrix>(z).householderQ();
}

LogicalCircuit random_circuit(std::mt19937_64& rng) {
  LogicalCircuit c(3);
  std::uniform_int_distribution<int> kind(0, 2), qubit(0, 2), k(1, 15);
  std::normal_distribution<double> n(0.0, 1.0);
  for (int i = 0; i < 10; ++i) {
    const int q = qubit(rng);
    switch (kind(rng)) {
      case 0: c.single(q, {n(rng), n(rng), n(rng)}, 3.0 * n(rng)); break;
      case 1: c.hadamard(q); break;
      default: c.controlled_phase(q, (q + 1 + qubit(rng) % 2) % 3, k(rng) * kPi / 8); break;
    }
  }
  return c;
}

ExperimentConfig base_config(const std::string& experiment) {
  ExperimentConfig c;
  c.experiment = experiment;
  c.seed = 1;
  return c;
}

Outcome propagator_equivalence() {
  const double g = default_device().g();
  const SpaceLayout l({2, 3});
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> ud(-6.0, 6.0), ut(0.0, 6.0);
  double worst_rk4 = 0.0, worst_expm = 0.0;
  for (int k = 0; k < 50; ++k) {
    const double delta = ud(rng) * g, t = ut(rng) / g;
    const CMatrix h = jc_hamiltonian(l, delta, g);
    const CMatrix analytic = assemble_offres_unitary(l, delta, g, t).entries;
    const int steps = std::max(1, static_cast<int>(std::ceil(t / 2e-10)));
    worst_rk4 = std::max(worst_rk4, (analytic - rk4_propagator(h, t, steps)).cwiseAbs().maxCoeff());
    worst_expm = std::max(worst_expm, (analytic - unitary_propagator(h, t)).cwiseAbs().maxCoeff());
  }
  return {worst_rk4 < 1e-8 && worst_expm < 1e-8,
          "max |analytic - RK4| = " + fmt("%.2e", worst_rk4) + ", max |analytic - expm| = " + fmt("%.2e", worst_expm)};
}

Outcome cphi_closure() {
  const double g = default_device().g();
  double worst_mass = 0.0, worst_phase = 0.0;
  for (int k = -15; k <= 15; ++k) {
    if (k == 0) continue;
    const double phi = k * kPi / 8.0;
    const CMatrix b = computational_block(cphi_sequence_unitary(solve_cphi(phi, g), g).entries, 3);
    worst_mass = std::max(worst_mass, offdiagonal_mass(b));
    worst_phase = std::max(worst_phase, phase_distance(controlled_phase_of(b), phi));
  }
  return {worst_mass < 1e-9 && worst_phase < 1e-9,
          "30 phases, max off-diagonal mass " + fmt("%.2e", worst_mass) + ", max phase error " + fmt("%.2e", worst_phase)};
}

Outcome duration_ratio() {
  const double g = default_device().g();
  const double r = 2.0 * solve_cphi(kPi, g).t_int / swap_duration(g);
  return {std::abs(r - 2.449) <= 0.01, "2 t_int / t_swap = " + fmt("%.5f", r)};
}

Outcome rb_reproduction() {
  ExperimentConfig c = base_config("rb");
  c.decoherence = DecoherenceMode::full;
  const ExperimentContext ctx(c);
  RBOptions o;
  o.seeds = c.rb_seeds;
  o.lengths = c.rb_lengths;
  o.rng_seed = c.seed;
  o.pulse_duration = c.pulse_duration;
  const RBFit ft = fit_rb(run_rb(ctx.executor, {kTransmon}, o));
  const double measured[3] = {0.9593, 0.9550, 0.9495};
  bool pass = true;
  double swap = 0.0;
  std::string detail = "transmon F " + pct(ft.F) + ";";
  for (int m = 0; m < 3; ++m) {
    const RBFit f = fit_rb(run_rb(ctx.executor, {m}, o));
    swap += ((1.0 - f.F) - (1.0 - ft.F)) / 6.0;
    pass = pass && std::abs(f.F - measured[m]) <= 0.01;
    if (m == 0) pass = pass && within(f.F, 0.952, 0.962);
    detail += " mode " + std::to_string(m + 1) + " F " + pct(f.F) + " (p " + pct(f.p) + ");";
  }
  pass = pass && std::abs(swap - 0.0171) <= 0.005;
  return {pass, detail + " swap infidelity " + pct(swap)};
}

Outcome cphi_trend() {
  ExperimentConfig c = base_config("cphi-tomo");
  c.decoherence = DecoherenceMode::full;
  c.spam = SpamMode::none;
  const ExperimentContext ctx(c);
  std::vector<double> infid;
  bool monotone = true;
  for (int k = 1; k <= 15; ++k) {
    infid.push_back(1.0 - cphi_fidelity(ctx, k * kPi / 8.0, 1, c.seed).compensation.fidelity);
    if (infid.size() > 1 && infid.back() < infid[infid.size() - 2] - 1e-9) monotone = false;
  }
  ExperimentConfig rc = base_config("cphi-repeat");
  rc.decoherence = DecoherenceMode::full;
  rc.spam = SpamMode::full;
  rc.repetitions = 20;
  const ResultBundle b = run(rc);
  const double f_pi = b.summary["fidelity"].get<double>();
  return {monotone && within(f_pi, 0.87, 0.92), std::string("infidelity ") + (monotone ? "non-decreasing" : "NOT monotone") +
                                                    " from " + pct(infid.front()) + " (pi/8) to " + pct(infid.back()) +
                                                    " (15pi/8); repetition-fit F_pi " + pct(f_pi)};
}

Outcome qft_budget() {
  struct Case {
    const char* name;
    DecoherenceMode d;
    SpamMode s;
    double target;
  };
  const std::vector<Case> cases{{"no-SPAM", DecoherenceMode::full, SpamMode::none, 0.802},
                                {"prep-only", DecoherenceMode::full, SpamMode::prep, 0.742},
                                {"measure-only", DecoherenceMode::full, SpamMode::measure, 0.736},
                                {"full SPAM", DecoherenceMode::full, SpamMode::full, 0.689},
                                {"infinite-phonon", DecoherenceMode::infinite_phonon, SpamMode::full, 0.773},
                                {"infinite-qubit", DecoherenceMode::infinite_qubit, SpamMode::full, 0.834}};
  bool pass = true;
  std::string detail;
  for (const auto& k : cases) {
    ExperimentConfig c = base_config("qft-tomo");
    c.decoherence = k.d;
    c.spam = k.s;
    const double f = qft_tomography(ExperimentContext(c)).score.compensation.fidelity;
    const bool ok = std::abs(f - k.target) <= 0.02;
    pass = pass && ok;
    detail += std::string(detail.empty() ? "" : "; ") + k.name + " " + pct(f) + " vs " + pct(k.target) + (ok ? "" : " (out)");
  }
  return {pass, detail};
}

Outcome qpf() {
  double worst = 0.0;
  bool recovered = true;
  std::string detail;
  for (int r : {1, 2, 4}) {
    ExperimentConfig ideal = base_config("qpf");
    ideal.period = r;
    ideal.decoherence = DecoherenceMode::none;
    ideal.spam = SpamMode::none;
    const auto p = qpf_distribution(ExperimentContext(ideal), r);
    const auto t = qpf_theoretical_distribution(qpf_truth_table(r));
    for (size_t y = 0; y < 8; ++y) worst = std::max(worst, std::abs(p[y] - t[y]));

    ExperimentConfig noisy = ideal;
    noisy.decoherence = DecoherenceMode::full;
    noisy.spam = SpamMode::full;
    noisy.shots = 1000;
    noisy.runs = 20;
    const int ok = run(noisy).summary["successes"].get<int>();
    recovered = recovered && ok == 20;
    detail += " r=" + std::to_string(r) + ": " + std::to_string(ok) + "/20;";
  }
  return {worst < 1e-9 && recovered, "ideal deviation " + fmt("%.2e", worst) + ";" + detail};
}

Outcome tomography_integrity() {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> n(0.0, 1.0);
  double chi_err = 0.0;
  for (int q : {1, 2, 3}) {
    const int d = 1 << q;
    const CMatrix e = superop_from_unitary(random_unitary(d, rng)).entries;
    chi_err = std::max(chi_err, (chi_to_superop(superop_to_chi(e, q), q) - e).cwiseAbs().maxCoeff());
  }
  double worst_f = 1.0;
  for (int q : {1, 2}) {
    for (int trial = 0; trial < 3; ++trial) {
      const CMatrix u = random_unitary(1 << q, rng);
      std::vector<CMatrix> in, out;
      for (const auto& labels : all_input_labels(q)) {
        in.push_back(input_density(labels));
        out.push_back(state_tomography(exact_outcome_table(u * in.back() * u.adjoint(), q), q));
      }
      const CMatrix e = process_tomography(in, out).entries;
      // Scored against a locally Z-rotated target so the compensation has work to do.
      std::vector<double> z(static_cast<size_t>(q));
      for (auto& x : z) x = n(rng);
      worst_f = std::min(worst_f, compensate_local_phases(e, z_rotations(z) * u, q).fidelity);
    }
  }
  const MisassignmentModel m{0.88, 0.85};
  double mis = 0.0;
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> p(8);
    for (auto& x : p) x = ud(rng);
    const double s = std::accumulate(p.begin(), p.end(), 0.0);
    for (auto& x : p) x /= s;
    const auto back = correct_misassignment(apply_misassignment(p, m), m).p;
    for (size_t i = 0; i < 8; ++i) mis = std::max(mis, std::abs(back[i] - p[i]));
  }
  return {chi_err < 1e-10 && worst_f > 1.0 - 1e-6 && mis < 1e-12,
          "chi round trip " + fmt("%.2e", chi_err) + ", worst compensated QPT fidelity 1 - " + fmt("%.2e", 1.0 - worst_f) +
              ", misassignment round trip " + fmt("%.2e", mis)};
}

Outcome property_suites() {
  std::mt19937_64 rng(9);
  bool em_ok = true;
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int em_runs = 0;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> h(8);
    for (auto& v : h) v = std::pow(u(rng), 3.0);
    try {
      const auto fit = em_fit(h);
      ++em_runs;
      for (size_t k = 1; k < fit.log_likelihood.size(); ++k)
        em_ok = em_ok && fit.log_likelihood[k] >= fit.log_likelihood[k - 1] - 1e-9 * std::abs(fit.log_likelihood[k - 1]);
    } catch (const FitError&) {
    }
  }

  const DeviceParams dev = default_device();
  const SpaceLayout l({2, 3, 3});
  std::vector<CMatrix> ls;
  for (const auto& x : local_collapse_operators(2, dev.transmon_t1, dev.transmon_t2, DephasingConvention::coherence_rate))
    ls.push_back(embed(l, 0, x));
  for (int f = 1; f <= 2; ++f)
    for (const auto& x : local_collapse_operators(3, dev.mode(f - 1).t1, dev.mode(f - 1).t2,
                                                  DephasingConvention::coherence_rate))
      ls.push_back(embed(l, f, x));
  CVector psi = CVector::Zero(l.total_dim());
  psi(l.stride(0)) = std::sqrt(0.5);
  psi(l.stride(2)) = std::sqrt(0.5);
  const CMatrix sp = embed(l, 0, ops::annihilation(2).adjoint());
  const CMatrix a1 = embed(l, 1, ops::annihilation(3));
  const CMatrix h = -1.6 * dev.g() * embed(l, 0, ops::number(2)) + dev.g() * (sp * a1 + sp.adjoint() * a1.adjoint());
  const auto r = evolve_lindblad({{h, 2.0e-6}, {CMatrix::Zero(l.total_dim(), l.total_dim()), 5e-6}}, ls,
                                 DensityMatrix::from_pure(l, psi), 2e-9);
  const double trace_err = std::abs(r.final_state.trace().real() - 1.0);

  const auto& grp = clifford_group();
  int closed = 0;
  for (int x = 0; x < grp.size(); ++x)
    for (int y = 0; y < grp.size(); ++y)
      if (grp.lookup(grp.gate(x).matrix * grp.gate(y).matrix) >= 0) ++closed;

  const Executor ex(dev, {CoherenceFlags::none()});
  double worst = 1.0;
  for (int trial = 0; trial < 20; ++trial) {
    const auto c = random_circuit(rng);
    CompileOptions o;
    o.pulse_duration = trial % 2 ? 50e-9 : 0.0;
    o.virtual_z = trial % 4 < 2;
    worst = std::min(worst, unitary_process_fidelity(logical_unitary(ex, compile(c, dev, o), 3), circuit_unitary(c)));
  }
  return {em_ok && em_runs > 0 && trace_err < 1e-8 && closed == 576 && worst > 1.0 - 1e-6,
          "EM monotone on " + std::to_string(em_runs) + " fits" + (em_ok ? "" : " (violated)") + ", Lindblad trace error " +
              fmt("%.2e", trace_err) + ", Clifford products closed " + std::to_string(closed) +
              "/576, worst compiled-circuit fidelity 1 - " + fmt("%.2e", 1.0 - worst)};
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    double budget_s;
    std::function<Outcome()> run;
  };
  const std::vector<Criterion> criteria{{"propagator equivalence", 10, propagator_equivalence},
                                        {"C_phi closure", 30, cphi_closure},
                                        {"duration ratio", 1, duration_ratio},
                                        {"RB reproduction", 300, rb_reproduction},
                                        {"C_phi infidelity trend", 600, cphi_trend},
                                        {"QFT3 error budget", 1800, qft_budget},
                                        {"QPF", 600, qpf},
                                        {"tomography integrity", 60, tomography_integrity},
                                        {"property suites", 120, property_suites}};
  int failed = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs > criteria[i].budget_s) {
      o.pass = false;
      o.detail += "; over time budget";
    }
    if (!o.pass) ++failed;
    std::printf("[%s] %zu. %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].name, o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - static_cast<size_t>(failed), criteria.size());
  return failed == 0 ? 0 : 1;
}
