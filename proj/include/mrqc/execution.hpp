#pragma once
// Running compiled schedules on the executor and reading out populations.

#include <map>
#include <vector>

#include "mrqc/compiler.hpp"
#include "mrqc/simulator.hpp"

namespace mrqc {

/// Executes a schedule from the ground state of its initially live modes.
inline SimState run_schedule(const Executor& ex, const CompiledSchedule& s) {
  SimState st = ex.ground_state(s.initial_modes);
  ex.run(st, s.segments);
  return st;
}

/// Initial state with each qubit already in its labelled state and no frame
/// phase: the transmon holds the transmon-homed qubit, each live mode its own.
inline SimState prepared_state(const Executor& ex, const std::vector<int>& home, const std::vector<int>& modes,
                               const std::vector<PrepLabel>& labels) {
  auto density = [](PrepLabel l) {
    const CVector v = prep_state(l);
    return CMatrix(v * v.adjoint());
  };
  CMatrix transmon = density(PrepLabel::zero);
  std::vector<CMatrix> mode_states(modes.size(), density(PrepLabel::zero));
  for (size_t q = 0; q < home.size(); ++q) {
    if (home[q] == kTransmon) {
      transmon = density(labels[q]);
      continue;
    }
    const auto it = std::find(modes.begin(), modes.end(), home[q]);
    if (it != modes.end()) mode_states[static_cast<size_t>(it - modes.begin())] = density(labels[q]);
  }
  return ex.product_state(modes, transmon, mode_states);
}

/// Total |e> population of the transmon, summed over measurement branches.
inline double transmon_excited_population(const SimState& s) {
  const Eigen::Index d = s.layout.total_dim();
  double p = 0.0;
  for (const auto& b : s.branches)
    for (Eigen::Index i = d / 2; i < d; ++i) p += b.rho(i, i).real();
  return p;
}

/// Probability of each measurement record, keyed by the outcome bits in
/// measurement order.
inline std::map<std::vector<int>, double> outcome_probabilities(const SimState& s) {
  std::map<std::vector<int>, double> out;
  for (const auto& b : s.branches) out[b.outcomes] += b.rho.trace().real();
  return out;
}

/// Outcome distribution over 2^k records, with the first measurement as the
/// most significant bit.
inline std::vector<double> outcome_distribution(const SimState& s, int k) {
  std::vector<double> p(static_cast<size_t>(1) << k, 0.0);
  for (const auto& [bits, prob] : outcome_probabilities(s)) {
    if (static_cast<int>(bits.size()) != k) throw DimensionError("outcome_distribution: unexpected record length");
    size_t idx = 0;
    for (int b : bits) idx = 2 * idx + static_cast<size_t>(b);
    p[idx] += prob;
  }
  return p;
}

/// Probability that the last recorded measurement returned 1.
inline double last_outcome_one(const SimState& s) {
  double p = 0.0;
  for (const auto& b : s.branches)
    if (!b.outcomes.empty() && b.outcomes.back() == 1) p += b.rho.trace().real();
  return p;
}

/// Schedule unitary restricted to transmon |g> and the qubit levels of each
/// phonon-stored qubit, with the final frame phases removed. Qubit q lives in
/// factor q + 1.
inline CMatrix logical_unitary(const Executor& ex, const CompiledSchedule& s, int n) {
  std::vector<int> modes(s.mode_assignment.begin(), s.mode_assignment.end());
  const CMatrix u = ex.schedule_unitary(modes, s.segments);
  std::vector<int> factors{2};
  for (int m : modes) factors.push_back(ex.mode_spec(m).truncation);
  const SpaceLayout l(factors);
  const int d = 1 << n;
  std::vector<int> idx(static_cast<size_t>(d));
  for (int i = 0; i < d; ++i) {
    int full = 0;
    for (int q = 0; q < n; ++q) full += ((i >> (n - 1 - q)) & 1) * l.stride(q + 1);
    idx[static_cast<size_t>(i)] = full;
  }
  CMatrix r(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) r(i, j) = u(idx[static_cast<size_t>(i)], idx[static_cast<size_t>(j)]);
  for (int i = 0; i < d; ++i) {
    double lam = 0.0;
    for (int q = 0; q < n; ++q)
      if ((i >> (n - 1 - q)) & 1) lam += s.frame_phases[static_cast<size_t>(q)];
    r.row(i) *= std::exp(-kI * lam);
  }
  return r;
}

/// |Tr(a^dag b)|^2 / d^2.
inline double unitary_process_fidelity(const CMatrix& a, const CMatrix& b) {
  const double d = static_cast<double>(a.rows());
  return std::norm((a.adjoint() * b).trace()) / (d * d);
}

}  // namespace mrqc
