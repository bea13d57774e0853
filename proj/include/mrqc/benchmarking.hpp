#pragma once
// Single-qubit randomized benchmarking on the transmon and on phonon-stored
// qubits.

#include <array>
#include <cmath>
#include <random>
#include <vector>

#include "json.hpp"
#include "mrqc/analysis.hpp"
#include "mrqc/errors.hpp"
#include "mrqc/gates.hpp"
#include "mrqc/simulator.hpp"

namespace mrqc {

struct CliffordGate {
  std::array<double, 3> axis{0, 0, 1};
  double angle = 0.0;
  CMatrix matrix;
};

/// Equality of 2x2 unitaries up to a global phase.
inline bool equal_up_to_phase(const CMatrix& a, const CMatrix& b, double tol = 1e-9) {
  const cplx overlap = (a.adjoint() * b).trace() / 2.0;
  return std::abs(std::abs(overlap) - 1.0) < tol;
}

/// The 24 single-qubit Cliffords as axis-angle rotations, with their
/// multiplication and inverse tables.
class CliffordGroup {
 public:
  CliffordGroup() {
    auto add = [&](std::array<double, 3> axis, double angle) {
      CliffordGate c;
      c.axis = normalized_axis(axis);
      c.angle = angle;
      c.matrix = ops::rotation(c.axis, angle);
      gates_.push_back(c);
    };
    add({0, 0, 1}, 0.0);
    add({1, 0, 0}, kPi);
    add({0, 1, 0}, kPi);
    add({0, 0, 1}, kPi);
    for (double s : {1.0, -1.0}) add({s, 0, 0}, kPi / 2.0);
    for (double s : {1.0, -1.0}) add({0, s, 0}, kPi / 2.0);
    for (double s : {1.0, -1.0}) add({0, 0, s}, kPi / 2.0);
    for (double s : {1.0, -1.0}) add({s, 0, 1}, kPi);
    for (double s : {1.0, -1.0}) add({0, s, 1}, kPi);
    for (double s : {1.0, -1.0}) add({1, s, 0}, kPi);
    for (double angle : {2.0 * kPi / 3.0, -2.0 * kPi / 3.0})
      for (double y : {1.0, -1.0})
        for (double s : {1.0, -1.0}) add({s, y, 1}, angle);

    const int n = size();
    product_.assign(static_cast<size_t>(n * n), -1);
    inverse_.assign(static_cast<size_t>(n), -1);
    for (int a = 0; a < n; ++a)
      for (int b = 0; b < n; ++b) {
        const int k = lookup(gate(a).matrix * gate(b).matrix);
        if (k < 0) throw DomainError("Clifford table is not closed under composition");
        product_[static_cast<size_t>(a * n + b)] = k;
        if (k == 0) inverse_[static_cast<size_t>(a)] = b;
      }
  }

  int size() const { return static_cast<int>(gates_.size()); }
  const CliffordGate& gate(int k) const { return gates_.at(static_cast<size_t>(k)); }
  const std::vector<CliffordGate>& gates() const { return gates_; }
  /// Index of gate(a) * gate(b), i.e. b applied first.
  int product(int a, int b) const { return product_[static_cast<size_t>(a * size() + b)]; }
  int inverse(int a) const { return inverse_[static_cast<size_t>(a)]; }

  /// Index of the table gate equal to `u` up to phase, or -1.
  int lookup(const CMatrix& u) const {
    for (int k = 0; k < size(); ++k)
      if (equal_up_to_phase(gate(k).matrix, u)) return k;
    return -1;
  }

 private:
  std::vector<CliffordGate> gates_;
  std::vector<int> product_, inverse_;
};

inline const CliffordGroup& clifford_group() {
  static const CliffordGroup g;
  return g;
}

inline const std::vector<CliffordGate>& clifford_table() { return clifford_group().gates(); }

/// `gates` are drawn uniformly; `recovery` undoes their product. The executed
/// sequence is gates followed by recovery.
struct RBSequence {
  int length = 0;
  std::vector<int> gates;
  int recovery = 0;

  std::vector<int> executed() const {
    std::vector<int> all = gates;
    all.push_back(recovery);
    return all;
  }
};

inline RBSequence sample_rb_sequence(int n, std::mt19937_64& rng) {
  if (n < 1) throw DomainError("sample_rb_sequence: n must be >= 1");
  const auto& grp = clifford_group();
  std::uniform_int_distribution<int> pick(0, grp.size() - 1);
  RBSequence s;
  s.length = n;
  int net = 0;
  for (int k = 0; k < n; ++k) {
    s.gates.push_back(pick(rng));
    net = grp.product(s.gates.back(), net);
  }
  s.recovery = grp.inverse(net);
  return s;
}

inline RBSequence sample_rb_sequence(int n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  return sample_rb_sequence(n, rng);
}

/// kTransmon, or the device index of the phonon mode that stores the qubit.
struct RBTarget {
  int mode = kTransmon;
  bool phonon() const { return mode != kTransmon; }
};

struct RBOptions {
  std::vector<int> lengths{1, 2, 3, 5, 7, 10, 15, 20, 30, 40};
  int seeds = 30;
  std::uint64_t rng_seed = 1;
  double pulse_duration = 0.0;
};

struct RBCurve {
  std::vector<int> lengths;
  std::vector<double> mean;
  std::vector<double> stderr_;
};

/// Pulse segments of one RB sequence. For a phonon target every Clifford is
/// followed by a swap out and a swap back in; each pulse axis is turned by the
/// phase the qubit has picked up in those swaps.
inline std::vector<GateSegment> rb_segments(const RBSequence& seq, const Executor& ex, RBTarget target,
                                            double pulse_duration) {
  const auto& grp = clifford_group();
  std::vector<GateSegment> out;
  double lambda = 0.0;
  const double g = ex.device().g();
  for (int k : seq.executed()) {
    const auto& c = grp.gate(k);
    if (c.angle == 0.0) {
      if (pulse_duration > 0.0) out.push_back(idle_segment(pulse_duration));
    } else {
      out.push_back(rotation_segment(rotate_axis_z(c.axis, lambda), c.angle, pulse_duration));
    }
    if (target.phonon()) {
      const auto s = swap_segment(target.mode, g);
      out.push_back(s);
      out.push_back(s);
      lambda += 2.0 * (-kPi / 2.0 - ex.mode_offset(target.mode) * s.duration);
    }
  }
  return out;
}

/// Mean ground-state survival per length, averaged over random sequences.
inline RBCurve run_rb(const Executor& ex, RBTarget target, const RBOptions& opt = {}) {
  RBCurve curve;
  std::mt19937_64 rng(opt.rng_seed);
  std::vector<int> modes;
  if (target.phonon()) modes.push_back(target.mode);
  for (int n : opt.lengths) {
    std::vector<double> p;
    for (int s = 0; s < opt.seeds; ++s) {
      const RBSequence seq = sample_rb_sequence(n, rng);
      SimState st = ex.ground_state(modes);
      ex.run(st, rb_segments(seq, ex, target, opt.pulse_duration));
      const CMatrix& rho = st.branches.front().rho;
      const Eigen::Index d = rho.rows();
      double ground = 0.0;
      for (Eigen::Index i = 0; i < d / 2; ++i) ground += rho(i, i).real();
      p.push_back(ground);
    }
    double m = 0.0, v = 0.0;
    for (double x : p) m += x;
    m /= static_cast<double>(p.size());
    for (double x : p) v += (x - m) * (x - m);
    curve.lengths.push_back(n);
    curve.mean.push_back(m);
    curve.stderr_.push_back(p.size() > 1 ? std::sqrt(v / static_cast<double>(p.size() - 1) / static_cast<double>(p.size())) : 0.0);
  }
  return curve;
}

struct RBFit {
  double p = 1.0, A = 0.0, c = 0.0, F = 1.0;
  double sigma_p = 0.0;
};

/// P(n) = A p^n + c, F = (p + 1) / 2. A curve that never decays gives p = 1.
inline RBFit fit_rb(const RBCurve& curve) {
  if (curve.lengths.size() < 4) throw FitError("fit_rb: at least 4 lengths required");
  std::vector<double> x(curve.lengths.begin(), curve.lengths.end());
  if (is_flat(curve.mean, 1e-10)) return {1.0, 0.0, curve.mean.front(), 1.0, 0.0};
  const ExpFit e = exp_fit(x, curve.mean);
  return {e.p, e.A, e.c, (e.p + 1.0) / 2.0, e.sigma_p};
}

inline nlohmann::json to_json(const RBFit& f) {
  return {{"p", f.p}, {"A", f.A}, {"c", f.c}, {"fidelity", f.F}, {"sigma_p", f.sigma_p}};
}

}  // namespace mrqc
