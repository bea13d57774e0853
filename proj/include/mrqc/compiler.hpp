#pragma once
// Logical circuits on phonon-stored qubits, and their compilation into
// transmon pulse schedules with SWAP insertion and a frame-phase ledger.
//
// Frame convention: for a qubit q, the physical amplitude of |1> (|e> in the
// transmon, one phonon in a mode) equals the logical amplitude times
// exp(i lambda_q). The ledger tracks lambda_q through every segment.

#include <algorithm>
#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "mrqc/device.hpp"
#include "mrqc/errors.hpp"
#include "mrqc/gates.hpp"
#include "mrqc/qstate.hpp"

namespace mrqc {

enum class GateType { prepare, single, hadamard, controlled_phase, measure, discard, oracle };

inline const char* gate_type_name(GateType t) {
  switch (t) {
    case GateType::prepare: return "prepare";
    case GateType::single: return "single";
    case GateType::hadamard: return "hadamard";
    case GateType::controlled_phase: return "controlled_phase";
    case GateType::measure: return "measure";
    case GateType::discard: return "discard";
    case GateType::oracle: return "oracle";
  }
  return "?";
}

/// Rotation taking |0> to the labelled state (up to global phase).
inline std::optional<std::pair<std::array<double, 3>, double>> prep_rotation(PrepLabel l) {
  switch (l) {
    case PrepLabel::zero: return std::nullopt;
    case PrepLabel::one: return std::make_pair(std::array<double, 3>{1, 0, 0}, kPi);
    case PrepLabel::plus: return std::make_pair(std::array<double, 3>{0, 1, 0}, kPi / 2.0);
    case PrepLabel::plus_i: return std::make_pair(std::array<double, 3>{1, 0, 0}, -kPi / 2.0);
  }
  return std::nullopt;
}

/// Rotation mapping the +1 eigenstate of `axis` onto |0> before a z readout.
inline std::optional<std::pair<std::array<double, 3>, double>> measure_prerotation(Axis a) {
  switch (a) {
    case Axis::z: return std::nullopt;
    case Axis::x: return std::make_pair(std::array<double, 3>{0, 1, 0}, -kPi / 2.0);
    case Axis::y: return std::make_pair(std::array<double, 3>{1, 0, 0}, kPi / 2.0);
  }
  return std::nullopt;
}

struct LogicalGate {
  GateType type = GateType::single;
  int q = 0;
  int q2 = -1;  // controlled_phase partner, or oracle target
  std::array<double, 3> axis{0, 0, 1};
  double angle = 0.0;  // rotation angle, or phi for controlled_phase
  Axis measure_axis = Axis::z;
  PrepLabel label = PrepLabel::zero;
  std::string tag;
};

struct LogicalCircuit {
  int n_qubits = 0;
  std::vector<int> home;  // per qubit: device mode index, or kTransmon
  std::vector<LogicalGate> gates;

  LogicalCircuit() = default;
  explicit LogicalCircuit(int n) : n_qubits(n), home(static_cast<size_t>(n)) {
    for (int q = 0; q < n; ++q) home[static_cast<size_t>(q)] = q;
  }

  LogicalCircuit& prepare(int q, PrepLabel l) {
    LogicalGate g{GateType::prepare, q};
    g.label = l;
    return push(g);
  }
  LogicalCircuit& single(int q, const std::array<double, 3>& axis, double angle) {
    LogicalGate g{GateType::single, q};
    g.axis = normalized_axis(axis);
    g.angle = angle;
    return push(g);
  }
  LogicalCircuit& hadamard(int q) { return push({GateType::hadamard, q}); }
  LogicalCircuit& controlled_phase(int a, int b, double phi) {
    LogicalGate g{GateType::controlled_phase, a, b};
    g.angle = phi;
    return push(g);
  }
  LogicalCircuit& measure(int q, Axis a = Axis::z) {
    LogicalGate g{GateType::measure, q};
    g.measure_axis = a;
    return push(g);
  }
  LogicalCircuit& discard(int q) { return push({GateType::discard, q}); }
  /// CNOT oracle: `control` flips `target`.
  LogicalCircuit& oracle_cnot(int control, int target, std::string tag = "cnot") {
    LogicalGate g{GateType::oracle, control, target};
    g.tag = std::move(tag);
    return push(g);
  }

  void validate() const {
    if (static_cast<int>(home.size()) != n_qubits) throw CompileError("circuit: one home per qubit required");
    std::set<int> used;
    for (int h : home) {
      if (h == kTransmon) continue;
      if (h < 0 || !used.insert(h).second) throw CompileError("circuit: mode assignment must be injective");
    }
    if (std::count(home.begin(), home.end(), kTransmon) > 1)
      throw CompileError("circuit: at most one qubit can live in the transmon");
    for (const auto& g : gates) {
      if (g.q < 0 || g.q >= n_qubits) throw DimensionError("circuit: qubit index out of range");
      const bool two = g.type == GateType::controlled_phase || g.type == GateType::oracle;
      if (two && (g.q2 < 0 || g.q2 >= n_qubits || g.q2 == g.q))
        throw DimensionError("circuit: invalid second qubit");
    }
  }

 private:
  LogicalCircuit& push(LogicalGate g) {
    if (g.q < 0 || g.q >= n_qubits) throw DimensionError("circuit: qubit index out of range");
    gates.push_back(std::move(g));
    return *this;
  }
};

// ---------------------------------------------------------------------------
// Ideal logical semantics

/// Unitary of a circuit containing only coherent gates, over q0 (x) q1 (x) ...
/// (qubit 0 is the most significant tensor factor).
inline CMatrix circuit_unitary(const LogicalCircuit& c) {
  const int n = c.n_qubits;
  const SpaceLayout l(std::vector<int>(static_cast<size_t>(n), 2));
  const int d = l.total_dim();
  CMatrix u = CMatrix::Identity(d, d);
  CMatrix h(2, 2);
  h << 1, 1, 1, -1;
  h /= std::sqrt(2.0);
  for (const auto& g : c.gates) {
    switch (g.type) {
      case GateType::single: u = embed(l, g.q, ops::rotation(g.axis, g.angle)) * u; break;
      case GateType::hadamard: u = embed(l, g.q, h) * u; break;
      case GateType::controlled_phase: {
        CMatrix diag = CMatrix::Identity(d, d);
        for (int i = 0; i < d; ++i)
          if (((i / l.stride(g.q)) & 1) && ((i / l.stride(g.q2)) & 1)) diag(i, i) = std::exp(kI * g.angle);
        u = diag * u;
        break;
      }
      case GateType::oracle: {
        CMatrix p = CMatrix::Zero(d, d);
        for (int i = 0; i < d; ++i) {
          const int j = ((i / l.stride(g.q)) & 1) ? i ^ l.stride(g.q2) : i;
          p(j, i) = 1.0;
        }
        u = p * u;
        break;
      }
      default: throw CompileError(std::string("circuit_unitary: non-unitary gate ") + gate_type_name(g.type));
    }
  }
  return u;
}

// ---------------------------------------------------------------------------
// Compilation

struct CompileOptions {
  double pulse_duration = 0.0;  // per single-qubit pulse; 0 = instantaneous
  bool virtual_z = true;        // logical z rotations as frame updates
  double measure_idle = 0.0;    // idle inserted after every projective measurement
  bool ideal_measure = false;   // measurement pre-rotations noise-free and instantaneous
  bool auto_release = true;     // swap a resident qubit home when another needs the transmon
  bool return_home = true;      // swap the final resident qubit home
  bool reset_after_final_measure = false;
  std::map<int, double> hadamard_phase;  // override by Hadamard occurrence index
  std::map<int, double> cnot_phase;      // override by oracle occurrence index
  std::map<double, double> theta;        // calibrated theta by phi
};

struct MeasurementRecord {
  int qubit = 0;
  Axis axis = Axis::z;
};

struct CompiledSchedule {
  std::vector<GateSegment> segments;
  std::vector<int> mode_assignment;      // per qubit: mode index or kTransmon
  std::vector<int> initial_modes;        // live modes at the start, qubit order
  std::vector<double> frame_phases;      // final lambda per qubit
  std::vector<std::vector<double>> frame_history;  // lambda per qubit after each segment
  std::vector<double> hadamard_phases;   // frame phase used by each Hadamard
  std::vector<double> ledger_hadamard_phases;  // ledger prediction for each Hadamard
  std::vector<double> cnot_phases;
  std::vector<MeasurementRecord> measurements;  // one per classical outcome bit, in order
  int final_resident = -1;
  double duration() const {
    double t = 0.0;
    for (const auto& s : segments) t += s.duration;
    return t;
  }
  int count(SegmentKind k) const {
    return static_cast<int>(std::count_if(segments.begin(), segments.end(), [k](const auto& s) { return s.kind == k; }));
  }
};

namespace detail {

class ScheduleBuilder {
 public:
  ScheduleBuilder(const DeviceParams& dev, const LogicalCircuit& c, const CompileOptions& o)
      : dev_(dev), c_(c), o_(o), lambda_(static_cast<size_t>(c.n_qubits), 0.0),
        state_(static_cast<size_t>(c.n_qubits), Loc::stored) {
    out_.mode_assignment = c.home;
    for (int q = 0; q < c.n_qubits; ++q) {
      const int h = c.home[static_cast<size_t>(q)];
      if (h == kTransmon) {
        state_[static_cast<size_t>(q)] = Loc::transmon;
        resident_ = q;
        pristine_ = q;
      } else {
        dev_.mode(h);
        out_.initial_modes.push_back(h);
      }
    }
  }

  CompiledSchedule build() {
    for (const auto& g : c_.gates) gate(g);
    if (o_.reset_after_final_measure) flush_reset();
    if (o_.return_home && resident_ >= 0 && home(resident_) != kTransmon) swap_out();
    out_.frame_phases = lambda_;
    out_.final_resident = resident_;
    return std::move(out_);
  }

 private:
  enum class Loc { stored, transmon, retired };

  const DeviceParams& dev_;
  const LogicalCircuit& c_;
  const CompileOptions& o_;
  std::vector<double> lambda_;
  std::vector<Loc> state_;
  int resident_ = -1;
  int hadamard_count_ = 0, oracle_count_ = 0;
  int pristine_ = -1;
  std::optional<std::pair<int, std::string>> pending_reset_;  // transmon holds a measured state
  CompiledSchedule out_;

  int home(int q) const { return c_.home[static_cast<size_t>(q)]; }
  double& lam(int q) { return lambda_[static_cast<size_t>(q)]; }
  Loc& loc(int q) { return state_[static_cast<size_t>(q)]; }

  /// Advances every stored qubit except those in `skip_mode` by free precession.
  void precess(double t, int skip_mode) {
    if (t <= 0.0) return;
    for (int q = 0; q < c_.n_qubits; ++q)
      if (loc(q) == Loc::stored && home(q) != skip_mode && home(q) != kTransmon) lam(q) -= dev_.mode_offset(home(q)) * t;
  }

  void emit(GateSegment s, int skip_mode = kTransmon - 100) {
    if (s.kind != SegmentKind::resonant_swap && s.kind != SegmentKind::offres_interaction &&
        s.kind != SegmentKind::reset_swap)
      skip_mode = kTransmon - 100;
    precess(s.duration, skip_mode);
    out_.segments.push_back(std::move(s));
    out_.frame_history.push_back(lambda_);
  }

  void rotation(int q, std::array<double, 3> axis, double angle, bool ideal = false, const std::string& tag = "rot") {
    const bool pure_z = std::abs(axis[0]) < 1e-15 && std::abs(axis[1]) < 1e-15;
    if (pure_z) {
      const double a = axis[2] > 0 ? angle : -angle;
      if (o_.virtual_z || ideal) {
        GateSegment v;
        v.kind = SegmentKind::virtual_z;
        v.angle = a;
        v.tag = tag;
        lam(q) -= a;
        emit(v);
        return;
      }
      for (auto s : physical_z(a, o_.pulse_duration)) {
        s.tag = tag;
        emit(s);
      }
      return;
    }
    auto s = rotation_segment(rotate_axis_z(axis, lam(q)), angle, ideal ? 0.0 : o_.pulse_duration);
    s.ideal = ideal;
    s.tag = tag;
    emit(s);
  }

  /// Waits out the slot of a pulse that the label does not need, so every
  /// preparation or readout setting occupies the same time.
  void empty_pulse_slot(const std::string& tag) {
    if (o_.pulse_duration <= 0.0) return;
    auto s = idle_segment(o_.pulse_duration);
    s.tag = tag;
    emit(s);
  }

  /// Swaps a measured transmon state into its reset mode before the transmon is reused.
  void flush_reset() {
    if (!pending_reset_) return;
    const auto [mode, tag] = *pending_reset_;
    pending_reset_.reset();
    reset_into(mode, tag);
  }

  void swap_in(int q) {
    flush_reset();
    if (resident_ >= 0) throw CompileError("swap_in: transmon occupied");
    const int m = home(q);
    auto s = swap_segment(m, dev_.g());
    s.tag = "swap_in q" + std::to_string(q);
    lam(q) += -kPi / 2.0 - dev_.mode_offset(m) * s.duration;
    loc(q) = Loc::transmon;
    resident_ = q;
    emit(s, m);
  }

  void swap_out() {
    const int q = resident_;
    const int m = home(q);
    auto s = swap_segment(m, dev_.g());
    s.tag = "swap_out q" + std::to_string(q);
    lam(q) += -kPi / 2.0 - dev_.mode_offset(m) * s.duration;
    loc(q) = Loc::stored;
    resident_ = -1;
    emit(s, m);
  }

  void release() {
    if (resident_ < 0) return;
    if (home(resident_) == kTransmon)
      throw CompileError("transmon is occupied by a transmon-homed qubit that cannot be released");
    if (!o_.auto_release) throw CompileError("transmon occupied and automatic release is disabled");
    swap_out();
  }

  void bring_in(int q) {
    if (loc(q) == Loc::retired) throw CompileError("qubit " + std::to_string(q) + " was already measured or discarded");
    if (resident_ == q) return;
    release();
    swap_in(q);
  }

  /// Lowest device mode not assigned to any qubit; the auxiliary mode otherwise.
  int spare_mode() const {
    for (int m = 0; m < dev_.num_modes(); ++m)
      if (std::find(c_.home.begin(), c_.home.end(), m) == c_.home.end()) return m;
    return kAuxiliaryMode;
  }

  void reset_into(int mode, const std::string& tag) {
    GateSegment s = swap_segment(mode, dev_.g());
    s.kind = SegmentKind::reset_swap;
    s.retire_target = true;
    s.tag = tag;
    emit(s, mode);
  }

  void gate(const LogicalGate& g) {
    if (g.q == pristine_ || g.q2 == pristine_) pristine_ = -1;
    switch (g.type) {
      case GateType::prepare: prepare(g); break;
      case GateType::single:
        bring_in(g.q);
        rotation(g.q, g.axis, g.angle);
        break;
      case GateType::hadamard: hadamard_gate(g.q); break;
      case GateType::controlled_phase: cphase(g.q, g.q2, g.angle, "cphase"); break;
      case GateType::measure: measure(g.q, g.measure_axis); break;
      case GateType::discard: discard(g.q); break;
      case GateType::oracle: oracle(g.q, g.q2); break;
    }
  }

  void prepare(const LogicalGate& g) {
    const int q = g.q;
    // A transmon-homed qubit still in |g> lends the transmon to the preparation.
    const int lender = (home(q) != kTransmon && resident_ >= 0 && resident_ == pristine_) ? resident_ : -1;
    if (lender >= 0) resident_ = -1;
    flush_reset();
    if (resident_ >= 0 && resident_ != q) release();
    if (home(q) != kTransmon && loc(q) == Loc::transmon) throw CompileError("prepare: qubit is in the transmon");
    resident_ = q;
    loc(q) = Loc::transmon;
    lam(q) = 0.0;
    if (auto r = prep_rotation(g.label)) rotation(q, r->first, r->second, false, "prepare");
    else empty_pulse_slot("prepare");
    if (home(q) != kTransmon) swap_out();
    if (lender >= 0) resident_ = lender;
  }

  void hadamard_gate(int q) {
    bring_in(q);
    const int k = hadamard_count_++;
    out_.ledger_hadamard_phases.push_back(wrap_phase(lam(q)));
    auto it = o_.hadamard_phase.find(k);
    const double phase = it != o_.hadamard_phase.end() ? it->second : lam(q);
    out_.hadamard_phases.push_back(wrap_phase(phase));
    for (auto s : mrqc::hadamard(phase, o_.pulse_duration)) emit(s);
  }

  void cphase(int a, int b, double phi, const std::string& tag) {
    if (resident_ != a && resident_ != b) bring_in(a);
    const int res = resident_;
    const int partner = res == a ? b : a;
    if (loc(partner) != Loc::stored) throw CompileError("controlled phase partner is not stored in a mode");
    const int m = home(partner);
    const CPhiParams p = solve_cphi(phi, dev_.g());
    auto th = o_.theta.find(phi);
    const double theta = th != o_.theta.end() ? th->second : p.theta;
    const double off = dev_.mode_offset(m);
    for (auto s : cphi_segments(p, m, off, o_.pulse_duration, theta)) {
      s.tag = tag;
      emit(s, s.kind == SegmentKind::offres_interaction ? m : kTransmon - 100);
    }
    // Rotation pulses inside the gate precessed the partner too: undo that here
    // and book the whole gate at once.
    const double total = cphi_duration(p, o_.pulse_duration);
    const double tz = physical_z_duration(o_.pulse_duration);
    lam(partner) += off * tz;
    lam(res) += p.phi_e0 - off * total;
    lam(partner) += p.phi_g1 - off * total;
    out_.frame_history.back() = lambda_;
  }

  void measure(int q, Axis axis) {
    const bool stored = loc(q) == Loc::stored && resident_ != q;
    if (stored && o_.ideal_measure) {
      // Pulse-free readout directly on the mode.
      if (auto r = measure_prerotation(axis)) {
        auto s = rotation_segment(rotate_axis_z(r->first, lam(q)), r->second, 0.0);
        s.target_mode = home(q);
        s.ideal = true;
        s.tag = "measure_pre";
        emit(s);
      }
      GateSegment m;
      m.kind = SegmentKind::measure;
      m.target_mode = home(q);
      m.ideal = true;
      m.tag = "measure q" + std::to_string(q);
      emit(m);
      out_.measurements.push_back({q, axis});
      loc(q) = Loc::retired;
      return;
    }
    bring_in(q);
    if (auto r = measure_prerotation(axis)) rotation(q, r->first, r->second, o_.ideal_measure, "measure_pre");
    else if (!o_.ideal_measure) empty_pulse_slot("measure_pre");
    GateSegment m;
    m.kind = SegmentKind::measure;
    m.target_mode = kTransmon;
    m.measure_axis = Axis::z;
    m.ideal = o_.ideal_measure;
    m.tag = "measure q" + std::to_string(q);
    emit(m);
    out_.measurements.push_back({q, axis});
    if (o_.measure_idle > 0.0) {
      auto idle = idle_segment(o_.measure_idle);
      idle.tag = "readout";
      emit(idle);
    }
    loc(q) = Loc::retired;
    resident_ = -1;
    pending_reset_ = std::make_pair(home(q) == kTransmon ? spare_mode() : home(q), "reset q" + std::to_string(q));
  }

  void discard(int q) {
    if (resident_ == q) {
      reset_into(spare_mode(), "discard q" + std::to_string(q));
      resident_ = -1;
    }
    loc(q) = Loc::retired;
  }

  void oracle(int control, int target) {
    bring_in(target);
    if (loc(control) != Loc::stored) throw CompileError("oracle control must be stored in a mode");
    const int k = oracle_count_++;
    rotation(target, {0, 1, 0}, kPi / 2.0, false, "oracle");
    cphase(target, control, kPi, "oracle");
    auto it = o_.cnot_phase.find(k);
    const double predicted = lam(target);
    out_.cnot_phases.push_back(wrap_phase(it != o_.cnot_phase.end() ? it->second : predicted));
    const double saved = lam(target);
    if (it != o_.cnot_phase.end()) lam(target) = it->second;
    rotation(target, {0, 1, 0}, -kPi / 2.0, false, "oracle");
    lam(target) = saved;
  }
};

}  // namespace detail

inline CompiledSchedule compile(const LogicalCircuit& circuit, const DeviceParams& dev, const CompileOptions& opts = {}) {
  circuit.validate();
  return detail::ScheduleBuilder(dev, circuit, opts).build();
}

// ---------------------------------------------------------------------------
// Circuit builders

/// QFT on n qubits with qubit n-1 the most significant bit. Output bits come
/// out reversed (no final swaps).
inline LogicalCircuit build_qft(int n, bool with_measurements = true) {
  if (n < 1 || n > 3) throw DomainError("build_qft: n must be 1..3");
  LogicalCircuit c(n);
  for (int q = n - 1; q >= 0; --q) {
    c.hadamard(q);
    for (int k = q - 1; k >= 0; --k) c.controlled_phase(q, k, kPi / static_cast<double>(1 << (q - k)));
    if (with_measurements) c.measure(q);
  }
  return c;
}

/// Period-finding circuit: three data qubits in modes 0..2, the oracle output
/// qubit in the transmon, QFT_3 and z readout. Outcome y = b(q2) + 2 b(q1) + 4 b(q0).
inline LogicalCircuit build_qpf(int r, bool with_measurements = true) {
  if (r != 1 && r != 2 && r != 4) throw DomainError("build_qpf: period must be 1, 2 or 4");
  LogicalCircuit c(4);
  c.home = {0, 1, 2, kTransmon};
  for (int q = 0; q < 3; ++q) c.prepare(q, PrepLabel::plus);
  if (r == 2) c.oracle_cnot(0, 3, "f(x)=x0");
  if (r == 4) c.oracle_cnot(1, 3, "f(x)=x1");
  c.discard(3);
  const LogicalCircuit qft = build_qft(3, with_measurements);
  for (const auto& g : qft.gates) c.gates.push_back(g);
  return c;
}

/// Truth table of the oracle used for period r.
inline std::vector<int> qpf_truth_table(int r) {
  std::vector<int> f(8, 0);
  for (int x = 0; x < 8; ++x) {
    if (r == 2) f[static_cast<size_t>(x)] = x & 1;
    if (r == 4) f[static_cast<size_t>(x)] = (x >> 1) & 1;
  }
  return f;
}

// ---------------------------------------------------------------------------
// Schedule dump

inline nlohmann::json schedule_json(const CompiledSchedule& s) {
  using nlohmann::json;
  json segs = json::array();
  for (const auto& g : s.segments) {
    json j{{"kind", kind_name(g.kind)}, {"duration_s", g.duration}, {"tag", g.tag}};
    if (g.target_mode == kTransmon) j["mode"] = "transmon";
    else if (g.target_mode == kAuxiliaryMode) j["mode"] = "auxiliary";
    else j["mode"] = g.target_mode;
    if (g.kind == SegmentKind::rotation) {
      j["axis"] = g.axis;
      j["angle"] = g.angle;
    }
    if (g.kind == SegmentKind::virtual_z) j["angle"] = g.angle;
    if (g.kind == SegmentKind::offres_interaction) j["detuning_rad_s"] = g.detuning;
    if (g.ideal) j["ideal"] = true;
    segs.push_back(j);
  }
  json meas = json::array();
  for (const auto& m : s.measurements) meas.push_back({{"qubit", m.qubit}, {"axis", std::string(1, axis_name(m.axis))}});
  return json{{"segments", segs},
              {"mode_assignment", s.mode_assignment},
              {"frame_phases", s.frame_phases},
              {"hadamard_phases", s.hadamard_phases},
              {"measurements", meas},
              {"duration_s", s.duration()}};
}

}  // namespace mrqc
