#pragma once
// Schedule executor: applies GateSegments to a transmon (x) live-mode density
// matrix in the rest-point frame, with measurement branching.
//
// Each segment couples the transmon to its target mode only. Spectator modes
// evolve freely (precession at their offset from the rest point plus their own
// decoherence). Every segment is applied as the exact propagator of its
// constant generator; propagators are cached by segment parameters.

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "mrqc/device.hpp"
#include "mrqc/dynamics.hpp"
#include "mrqc/gates.hpp"
#include "mrqc/qstate.hpp"

namespace mrqc {

struct ExecutionOptions {
  CoherenceFlags coherence = CoherenceFlags::full();
  DephasingConvention convention = DephasingConvention::coherence_rate;
};

/// One measurement history. `rho` is unnormalized: its trace is the
/// probability of `outcomes`.
struct Branch {
  std::vector<int> outcomes;
  CMatrix rho;
};

/// Live-system state. Factor 0 is the transmon; factor k >= 1 holds the mode
/// listed in modes[k-1] (a device index, or kAuxiliaryMode).
struct SimState {
  std::vector<int> modes;
  SpaceLayout layout;
  std::vector<Branch> branches;

  int factor_of(int mode) const {
    for (size_t k = 0; k < modes.size(); ++k)
      if (modes[k] == mode) return static_cast<int>(k) + 1;
    return -1;
  }
  double total_trace() const {
    double t = 0.0;
    for (const auto& b : branches) t += b.rho.trace().real();
    return t;
  }
  /// Sum over branches (the state with the measurement record forgotten).
  CMatrix mixed() const {
    CMatrix m = CMatrix::Zero(layout.total_dim(), layout.total_dim());
    for (const auto& b : branches) m += b.rho;
    return m;
  }
};

/// Embeds a qubit density matrix into the lowest two levels of a d-level system.
inline CMatrix embed_qubit_levels(const CMatrix& q, int d) {
  CMatrix out = CMatrix::Zero(d, d);
  out.topLeftCorner(2, 2) = q;
  return out;
}

/// Qubit unitary acting on levels {0, 1} of a d-level system, identity above.
inline CMatrix lift_qubit_unitary(const CMatrix& u, int d) {
  CMatrix out = CMatrix::Identity(d, d);
  out.topLeftCorner(2, 2) = u;
  return out;
}

class Executor {
 public:
  Executor(DeviceParams device, ExecutionOptions opts = {}) : dev_(std::move(device)), opts_(opts) {}

  const DeviceParams& device() const { return dev_; }
  const ExecutionOptions& options() const { return opts_; }

  const ModeSpec& mode_spec(int mode) const {
    if (mode == kAuxiliaryMode) {
      if (!aux_) aux_ = dev_.auxiliary_mode();
      return *aux_;
    }
    return dev_.mode(mode);
  }
  double mode_offset(int mode) const { return kTwoPi * (mode_spec(mode).frequency_hz - dev_.rest_frequency_hz); }

  /// Product state: transmon in `transmon` (2x2), mode k in `mode_states[k]`
  /// (2x2, embedded into the lowest levels).
  SimState product_state(const std::vector<int>& modes, const CMatrix& transmon,
                         const std::vector<CMatrix>& mode_states) const {
    if (mode_states.size() != modes.size()) throw DimensionError("product_state: one state per mode required");
    std::vector<int> factors{2};
    std::vector<CMatrix> parts{transmon};
    for (size_t k = 0; k < modes.size(); ++k) {
      const int d = mode_spec(modes[k]).truncation;
      factors.push_back(d);
      parts.push_back(embed_qubit_levels(mode_states[k], d));
    }
    SimState s{modes, SpaceLayout(factors), {}};
    s.branches.push_back({{}, kron_all(parts)});
    return s;
  }

  SimState ground_state(const std::vector<int>& modes) const {
    CMatrix g = CMatrix::Zero(2, 2);
    g(0, 0) = 1.0;
    return product_state(modes, g, std::vector<CMatrix>(modes.size(), g));
  }

  void run(SimState& s, const std::vector<GateSegment>& segments) const {
    for (const auto& seg : segments) apply(s, seg);
  }

  void apply(SimState& s, const GateSegment& seg) const {
    switch (seg.kind) {
      case SegmentKind::virtual_z: return;
      case SegmentKind::idle: free_evolution(s, seg.duration, kEvolveAll); return;
      case SegmentKind::rotation: apply_rotation(s, seg); return;
      case SegmentKind::measure: apply_measure(s, seg); return;
      case SegmentKind::resonant_swap:
      case SegmentKind::offres_interaction:
      case SegmentKind::reset_swap: apply_interaction(s, seg); return;
    }
  }

  /// Adds a mode in its ground state as the last factor.
  void add_mode(SimState& s, int mode) const {
    if (mode != kAuxiliaryMode && s.factor_of(mode) >= 0) throw DimensionError("add_mode: mode already live");
    const int d = mode_spec(mode).truncation;
    CMatrix g = CMatrix::Zero(d, d);
    g(0, 0) = 1.0;
    for (auto& b : s.branches) b.rho = kron(b.rho, g);
    s.modes.push_back(mode);
    std::vector<int> f = s.layout.factors();
    f.push_back(d);
    s.layout = SpaceLayout(f);
  }

  /// Traces a live mode out of every branch.
  void retire_mode(SimState& s, int mode) const { retire_factor(s, s.factor_of(mode)); }

  void retire_factor(SimState& s, int factor) const {
    if (factor < 1) throw DimensionError("retire: mode is not live");
    std::vector<int> keep;
    for (int k = 0; k < s.layout.num_factors(); ++k)
      if (k != factor) keep.push_back(k);
    for (auto& b : s.branches) b.rho = partial_trace(b.rho, s.layout, keep);
    s.modes.erase(s.modes.begin() + (factor - 1));
    s.layout = s.layout.subset(keep);
  }

  // -------------------------------------------------------------------------
  // Closed-system unitaries (used for semantic checks)

  /// Unitary of a measurement-free schedule, with every decoherence channel off.
  CMatrix schedule_unitary(const std::vector<int>& modes, const std::vector<GateSegment>& segments) const {
    std::vector<int> factors{2};
    for (int m : modes) factors.push_back(mode_spec(m).truncation);
    const SpaceLayout layout(factors);
    CMatrix u = CMatrix::Identity(layout.total_dim(), layout.total_dim());
    SimState probe{modes, layout, {}};
    for (const auto& seg : segments) {
      switch (seg.kind) {
        case SegmentKind::virtual_z: break;
        case SegmentKind::measure:
        case SegmentKind::reset_swap: throw DimensionError("schedule_unitary: schedule contains non-unitary steps");
        case SegmentKind::idle: u = free_unitary(probe, seg.duration, kEvolveAll) * u; break;
        case SegmentKind::rotation: {
          const int f = seg.target_mode == kTransmon ? 0 : probe.factor_of(seg.target_mode);
          const CMatrix r = lift_qubit_unitary(segment_rotation_matrix(seg), layout.factor(f));
          u = free_unitary(probe, seg.duration, seg.target_mode) * embed(layout, f, r) * u;
          break;
        }
        case SegmentKind::resonant_swap:
        case SegmentKind::offres_interaction: {
          const int f = probe.factor_of(seg.target_mode);
          const CMatrix local = interaction_unitary(seg, layout.factor(f));
          u = free_unitary(probe, seg.duration, seg.target_mode) * embed_two_factor(layout, f, local) * u;
          break;
        }
      }
    }
    return u;
  }

 private:
  static constexpr int kEvolveAll = -100;
  using Key = std::tuple<int, int, int, double, double, double, double, double, double>;

  DeviceParams dev_;
  ExecutionOptions opts_;
  mutable std::optional<ModeSpec> aux_;
  mutable std::map<Key, CMatrix> cache_;

  std::vector<CMatrix> transmon_collapse() const {
    if (!opts_.coherence.transmon) return {};
    return local_collapse_operators(2, dev_.transmon_t1, dev_.transmon_t2, opts_.convention);
  }
  std::vector<CMatrix> mode_collapse(int mode) const {
    if (!opts_.coherence.phonons) return {};
    const auto& m = mode_spec(mode);
    return local_collapse_operators(m.truncation, m.t1, m.t2, opts_.convention);
  }

  double interaction_epsilon(const GateSegment& seg) const {
    const double off = mode_offset(seg.target_mode);
    return seg.kind == SegmentKind::offres_interaction ? off + seg.detuning : off;
  }

  CMatrix interaction_hamiltonian(const GateSegment& seg, int d) const {
    const SpaceLayout l({2, d});
    const CMatrix sp = embed(l, 0, ops::annihilation(2).adjoint());
    const CMatrix a = embed(l, 1, ops::annihilation(d));
    const double g = dev_.g();
    return interaction_epsilon(seg) * embed(l, 0, ops::number(2)) + mode_offset(seg.target_mode) * embed(l, 1, ops::number(d)) +
           g * (sp * a + sp.adjoint() * a.adjoint());
  }

  CMatrix interaction_unitary(const GateSegment& seg, int d) const {
    return unitary_propagator(interaction_hamiltonian(seg, d), seg.duration);
  }

  static CMatrix embed_two_factor(const SpaceLayout& layout, int f, const CMatrix& local) {
    // Operator acting on factors {0, f} with `local` ordered (transmon, mode f).
    const int d = layout.total_dim();
    const std::vector<int> map = detail::split_index_map(layout, {0, f});
    const int da = static_cast<int>(local.rows()), db = d / da;
    CMatrix full = CMatrix::Zero(d, d);
    for (int a = 0; a < da; ++a)
      for (int b = 0; b < da; ++b) {
        if (local(a, b) == cplx(0.0)) continue;
        for (int r = 0; r < db; ++r) full(map[a * db + r], map[b * db + r]) = local(a, b);
      }
    return full;
  }

  /// Free evolution of every live mode except `skip` (and of the transmon when
  /// skip != kTransmon), as a unitary.
  CMatrix free_unitary(const SimState& s, double t, int skip) const {
    const int d = s.layout.total_dim();
    CMatrix u = CMatrix::Identity(d, d);
    if (t <= 0.0) return u;
    for (size_t k = 0; k < s.modes.size(); ++k) {
      if (s.modes[k] == skip) continue;
      const int f = static_cast<int>(k) + 1;
      const int dk = s.layout.factor(f);
      CMatrix ph = CMatrix::Zero(dk, dk);
      for (int n = 0; n < dk; ++n) ph(n, n) = std::exp(-kI * (mode_offset(s.modes[k]) * n * t));
      u = embed(s.layout, f, ph) * u;
    }
    return u;
  }

  const CMatrix& cached(const Key& key, const std::function<CMatrix()>& build) const {
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
    return cache_.emplace(key, build()).first->second;
  }

  void apply_local(SimState& s, const std::vector<int>& factors, const CMatrix& superop) const {
    LocalSuperopApplier app(s.layout, factors);
    for (auto& b : s.branches) app.apply(superop, b.rho);
  }

  /// Free evolution for time t of the transmon (unless skip == kTransmon) and
  /// of every live mode other than `skip`. skip = kEvolveAll evolves everything.
  void free_evolution(SimState& s, double t, int skip) const {
    if (t <= 0.0) return;
    if (skip != kTransmon) {
      const auto ls = transmon_collapse();
      if (!ls.empty()) {
        const CMatrix& e = cached(Key{0, 2, 0, 0, t, 0, 0, 0, 0}, [&] {
          return lindblad_propagator(CMatrix::Zero(2, 2), ls, t);
        });
        apply_local(s, {0}, e);
      }
    }
    for (size_t k = 0; k < s.modes.size(); ++k) {
      const int mode = s.modes[k];
      if (mode == skip) continue;
      const int f = static_cast<int>(k) + 1;
      const int d = s.layout.factor(f);
      const double off = mode_offset(mode);
      const CMatrix& e = cached(Key{1, d, mode, off, t, 0, 0, 0, 0}, [&] {
        return lindblad_propagator(off * ops::number(d), mode_collapse(mode), t);
      });
      apply_local(s, {f}, e);
    }
  }

  void apply_rotation(SimState& s, const GateSegment& seg) const {
    const CMatrix r = segment_rotation_matrix(seg);
    if (seg.target_mode != kTransmon) {
      const int f = s.factor_of(seg.target_mode);
      if (f < 0) throw DimensionError("rotation on a mode that is not live");
      if (seg.duration > 0.0) throw DomainError("mode rotations are ideal and instantaneous");
      LocalSuperopApplier app(s.layout, {f});
      const CMatrix u = lift_qubit_unitary(r, s.layout.factor(f));
      for (auto& b : s.branches) app.apply_unitary(u, b.rho);
      return;
    }
    const auto ls = transmon_collapse();
    if (seg.duration <= 0.0 || seg.ideal || ls.empty()) {
      LocalSuperopApplier app(s.layout, {0});
      for (auto& b : s.branches) app.apply_unitary(r, b.rho);
      if (seg.duration > 0.0 && !seg.ideal) free_evolution(s, seg.duration, kTransmon);
      return;
    }
    const CMatrix& e = cached(Key{2, 2, 0, seg.axis[0], seg.axis[1], seg.axis[2], seg.angle, seg.duration, 0}, [&] {
      const CMatrix h = (seg.angle / (2.0 * seg.duration)) *
                        (seg.axis[0] * ops::pauli_x() + seg.axis[1] * ops::pauli_y() + seg.axis[2] * ops::pauli_z());
      return lindblad_propagator(h, ls, seg.duration);
    });
    apply_local(s, {0}, e);
    free_evolution(s, seg.duration, kTransmon);
  }

  void apply_measure(SimState& s, const GateSegment& seg) const {
    const int f = seg.target_mode == kTransmon ? 0 : s.factor_of(seg.target_mode);
    if (f < 0) throw DimensionError("measurement of a mode that is not live");
    const auto proj = axis_projectors(seg.measure_axis, s.layout.factor(f));
    std::array<CMatrix, 2> full{embed(s.layout, f, proj[0]), embed(s.layout, f, proj[1])};
    std::vector<Branch> next;
    next.reserve(2 * s.branches.size());
    for (const auto& b : s.branches) {
      for (int k = 0; k < 2; ++k) {
        Branch nb{b.outcomes, full[static_cast<size_t>(k)] * b.rho * full[static_cast<size_t>(k)]};
        if (nb.rho.trace().real() < 1e-14) continue;
        nb.outcomes.push_back(k);
        next.push_back(std::move(nb));
      }
    }
    s.branches = std::move(next);
  }

  void apply_interaction(SimState& s, const GateSegment& seg) const {
    if (seg.kind == SegmentKind::reset_swap && (seg.target_mode == kAuxiliaryMode || s.factor_of(seg.target_mode) < 0))
      add_mode(s, seg.target_mode);
    int f = s.factor_of(seg.target_mode);
    if (seg.target_mode == kAuxiliaryMode) f = static_cast<int>(s.modes.size());
    if (f < 1) throw DimensionError("interaction with a mode that is not live");
    const int d = s.layout.factor(f);
    const double eps = interaction_epsilon(seg);
    auto ls = transmon_collapse();
    const auto lm = mode_collapse(seg.target_mode);
    const CMatrix& e = cached(Key{3, d, seg.target_mode, eps, seg.duration, mode_offset(seg.target_mode), 0, 0, 0}, [&] {
      const SpaceLayout l({2, d});
      std::vector<CMatrix> all;
      for (const auto& x : ls) all.push_back(embed(l, 0, x));
      for (const auto& x : lm) all.push_back(embed(l, 1, x));
      return lindblad_propagator(interaction_hamiltonian(seg, d), all, seg.duration);
    });
    apply_local(s, {0, f}, e);
    // Spectators: every live mode except the target.
    for (size_t k = 0; k < s.modes.size(); ++k) {
      const int fk = static_cast<int>(k) + 1;
      if (fk == f) continue;
      const int mode = s.modes[k];
      const int dk = s.layout.factor(fk);
      const double off = mode_offset(mode);
      const CMatrix& ek = cached(Key{1, dk, mode, off, seg.duration, 0, 0, 0, 0}, [&] {
        return lindblad_propagator(off * ops::number(dk), mode_collapse(mode), seg.duration);
      });
      apply_local(s, {fk}, ek);
    }
    if (seg.kind == SegmentKind::reset_swap && seg.retire_target) retire_factor(s, f);
  }
};

}  // namespace mrqc
