#pragma once
// Controlled-phase synthesis and the transmon-level gate segments that make up
// a pulse schedule.

#include <array>
#include <cmath>
#include <string>
#include <vector>

#include "mrqc/dynamics.hpp"
#include "mrqc/errors.hpp"
#include "mrqc/qstate.hpp"

namespace mrqc {

inline double wrap_phase(double x) {
  double r = std::fmod(x, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  return r;
}

/// Signed distance a - b folded into (-pi, pi].
inline double phase_distance(double a, double b) {
  double d = wrap_phase(a - b);
  if (d > kPi) d -= kTwoPi;
  return d;
}

// ---------------------------------------------------------------------------
// C_phi closed form

struct CPhiParams {
  double phi = 0.0;
  double delta = 0.0;  // omega_q - omega_phonon during the interaction, rad/s
  double t_int = 0.0;  // s
  double theta = 0.0;  // mid-sequence Z phase, in [0, 2 pi)
  double phi_e0 = 0.0;
  double phi_g1 = 0.0;
  double phi_e1 = 0.0;
  double phi1 = 0.0;  // by-product phase on the phonon qubit (= phi_g1)
  double phi2 = 0.0;  // by-product phase on the transmon qubit (= phi_e0)
};

inline CPhiParams solve_cphi(double phi, double g) {
  if (!(std::abs(phi) < kTwoPi) || phi == 0.0)
    throw DomainError("solve_cphi: phi must lie in (-2pi, 0) or (0, 2pi)");
  const double s = phi > 0.0 ? 1.0 : -1.0;
  const double q = kTwoPi / (phi - s * kTwoPi);
  CPhiParams p;
  p.phi = phi;
  p.delta = -s * 2.0 * g * std::sqrt(2.0) / std::sqrt(q * q - 1.0);
  p.t_int = kTwoPi / std::sqrt(p.delta * p.delta + 8.0 * g * g);
  const double w1 = std::sqrt(p.delta * p.delta + 4.0 * g * g);
  p.theta = wrap_phase(kPi - 2.0 * std::atan((p.delta / w1) * std::tan(0.5 * w1 * p.t_int)));
  const double dt = p.delta * p.t_int;
  p.phi_e0 = -dt + kPi;
  p.phi_g1 = -dt - p.theta + kPi;
  p.phi_e1 = -dt - p.theta;
  p.phi1 = p.phi_g1;
  p.phi2 = p.phi_e0;
  return p;
}

/// diag(1, e^{i phi1}, e^{i phi2}, e^{i(phi1 + phi2 + phi)}) over |g0>, |g1>, |e0>, |e1>.
inline OperatorMatrix cphi_ideal_unitary(const CPhiParams& p) {
  const double phi = p.phi_e1 - p.phi_e0 - p.phi_g1;
  CMatrix u = CMatrix::Zero(4, 4);
  u(0, 0) = 1.0;
  u(1, 1) = std::exp(kI * p.phi1);
  u(2, 2) = std::exp(kI * p.phi2);
  u(3, 3) = std::exp(kI * (p.phi1 + p.phi2 + phi));
  return OperatorMatrix(SpaceLayout({2, 2}), u);
}

/// Transmon Z phase gate diag(1, e^{-i theta}) embedded on a transmon (x) mode space.
inline CMatrix transmon_phase_gate(const SpaceLayout& layout, double theta) {
  CMatrix z = CMatrix::Identity(2, 2);
  z(1, 1) = std::exp(-kI * theta);
  return embed(layout, 0, z);
}

/// U(t_int) R(theta) U(t_int) in the phonon frame from the closed-form blocks.
inline OperatorMatrix cphi_sequence_unitary(const CPhiParams& p, double g, int truncation = 3) {
  const SpaceLayout layout({2, truncation});
  const CMatrix u = assemble_offres_unitary(layout, p.delta, g, p.t_int).entries;
  return OperatorMatrix(layout, u * transmon_phase_gate(layout, p.theta) * u);
}

/// Restriction of a transmon (x) mode operator to |g0>, |g1>, |e0>, |e1>.
inline CMatrix computational_block(const CMatrix& u, int truncation) {
  const std::array<int, 4> idx{jc_index(truncation, 0, 0), jc_index(truncation, 0, 1), jc_index(truncation, 1, 0),
                               jc_index(truncation, 1, 1)};
  CMatrix b(4, 4);
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) b(i, j) = u(idx[static_cast<size_t>(i)], idx[static_cast<size_t>(j)]);
  return b;
}

/// arg(u11) - arg(u01) - arg(u10) + arg(u00) of a diagonal two-qubit block, wrapped to [0, 2 pi).
inline double controlled_phase_of(const CMatrix& block) {
  return wrap_phase(std::arg(block(3, 3)) - std::arg(block(1, 1)) - std::arg(block(2, 2)) + std::arg(block(0, 0)));
}

inline double offdiagonal_mass(const CMatrix& block) {
  double m = 0.0;
  for (Eigen::Index i = 0; i < block.rows(); ++i)
    for (Eigen::Index j = 0; j < block.cols(); ++j)
      if (i != j) m += std::norm(block(i, j));
  return m;
}

// ---------------------------------------------------------------------------
// Gate segments

enum class SegmentKind { resonant_swap, offres_interaction, rotation, virtual_z, idle, measure, reset_swap };

inline const char* kind_name(SegmentKind k) {
  switch (k) {
    case SegmentKind::resonant_swap: return "resonant_swap";
    case SegmentKind::offres_interaction: return "offres_interaction";
    case SegmentKind::rotation: return "rotation";
    case SegmentKind::virtual_z: return "virtual_z";
    case SegmentKind::idle: return "idle";
    case SegmentKind::measure: return "measure";
    case SegmentKind::reset_swap: return "reset_swap";
  }
  return "?";
}

inline constexpr int kTransmon = -1;

/// One timed step of a schedule.
///
/// `target_mode` is a device mode index, kTransmon, or (for reset/discard
/// swaps) kAuxiliaryMode. Rotations and measurements normally target the
/// transmon; targeting a mode is reserved for ideal, pulse-free state access.
struct GateSegment {
  SegmentKind kind = SegmentKind::idle;
  int target_mode = kTransmon;
  double duration = 0.0;
  std::array<double, 3> axis{0.0, 0.0, 1.0};
  double angle = 0.0;
  double detuning = 0.0;     // offres_interaction: omega_q - omega_mode, rad/s
  Axis measure_axis = Axis::z;
  bool ideal = false;        // rotation/measure applied without decoherence
  bool retire_target = false;  // reset_swap: trace the target mode out afterwards
  std::string tag;
};

inline constexpr int kAuxiliaryMode = -2;

inline std::array<double, 3> normalized_axis(const std::array<double, 3>& a) {
  const double n = std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]);
  if (n == 0.0) throw DomainError("rotation axis must be nonzero");
  return {a[0] / n, a[1] / n, a[2] / n};
}

/// Axis rotated about z by `lambda`.
inline std::array<double, 3> rotate_axis_z(const std::array<double, 3>& a, double lambda) {
  const double c = std::cos(lambda), s = std::sin(lambda);
  return {a[0] * c - a[1] * s, a[0] * s + a[1] * c, a[2]};
}

inline double swap_duration(double g) { return kPi / (2.0 * g); }

inline GateSegment swap_segment(int mode, double g) {
  GateSegment s;
  s.kind = SegmentKind::resonant_swap;
  s.target_mode = mode;
  s.duration = swap_duration(g);
  s.tag = "swap";
  return s;
}

inline GateSegment rotation_segment(const std::array<double, 3>& axis, double angle, double duration = 0.0) {
  if (duration < 0.0) throw DomainError("rotation_segment: negative duration");
  GateSegment s;
  s.kind = SegmentKind::rotation;
  s.axis = normalized_axis(axis);
  s.angle = angle;
  s.duration = duration;
  s.tag = "rot";
  return s;
}

inline GateSegment idle_segment(double duration) {
  if (duration < 0.0) throw DomainError("idle_segment: negative duration");
  GateSegment s;
  s.kind = SegmentKind::idle;
  s.duration = duration;
  s.tag = "idle";
  return s;
}

inline CMatrix segment_rotation_matrix(const GateSegment& s) { return ops::rotation(s.axis, s.angle); }

/// Hadamard as R_y(-pi/2) R_x(pi) (R_x applied first), both axes turned about z
/// by `frame_phase`.
inline std::vector<GateSegment> hadamard(double frame_phase = 0.0, double pulse_duration = 0.0) {
  auto a = rotation_segment(rotate_axis_z({1, 0, 0}, frame_phase), kPi, pulse_duration);
  auto b = rotation_segment(rotate_axis_z({0, 1, 0}, frame_phase), -kPi / 2.0, pulse_duration);
  a.tag = b.tag = "hadamard";
  return {a, b};
}

/// A z rotation by `angle`: a zero-duration rotation when `pulse_duration` is
/// zero, otherwise two pi pulses about in-plane axes at 0 and angle/2.
inline std::vector<GateSegment> physical_z(double angle, double pulse_duration) {
  if (pulse_duration <= 0.0) return {rotation_segment({0, 0, 1}, angle, 0.0)};
  return {rotation_segment({1, 0, 0}, kPi, pulse_duration),
          rotation_segment({std::cos(angle / 2.0), std::sin(angle / 2.0), 0.0}, kPi, pulse_duration)};
}

inline double physical_z_duration(double pulse_duration) { return pulse_duration > 0.0 ? 2.0 * pulse_duration : 0.0; }

/// Pulse-level C_phi with the phonon in `mode`.
///
/// `mode_offset` is the mode's detuning from the transmon rest point. The mid
/// Z phase is advanced by mode_offset * t_Z so that the free phonon precession
/// during a finite-length Z does not alter the gate.
inline std::vector<GateSegment> cphi_segments(const CPhiParams& p, int mode, double mode_offset,
                                              double pulse_duration = 0.0, double theta_override = NAN) {
  const double theta = std::isnan(theta_override) ? p.theta : theta_override;
  GateSegment inter;
  inter.kind = SegmentKind::offres_interaction;
  inter.target_mode = mode;
  inter.duration = p.t_int;
  inter.detuning = p.delta;
  inter.tag = "cphi";
  std::vector<GateSegment> out{inter};
  const double tz = physical_z_duration(pulse_duration);
  for (auto s : physical_z(-(theta + mode_offset * tz), pulse_duration)) {
    s.tag = "cphi";
    out.push_back(s);
  }
  out.push_back(inter);
  return out;
}

inline double cphi_duration(const CPhiParams& p, double pulse_duration = 0.0) {
  return 2.0 * p.t_int + physical_z_duration(pulse_duration);
}

/// CNOT with the phonon as control and the transmon as target:
/// R_y(pi/2), C_pi, R_y(-pi/2), the last pulse's axis turned by `second_phase`.
inline std::vector<GateSegment> cnot_sequence(double g, int mode, double mode_offset, double second_phase = 0.0,
                                              double pulse_duration = 0.0) {
  const CPhiParams p = solve_cphi(kPi, g);
  std::vector<GateSegment> out{rotation_segment({0, 1, 0}, kPi / 2.0, pulse_duration)};
  for (const auto& s : cphi_segments(p, mode, mode_offset, pulse_duration)) out.push_back(s);
  out.push_back(rotation_segment(rotate_axis_z({0, 1, 0}, second_phase), -kPi / 2.0, pulse_duration));
  for (auto& s : out) s.tag = "cnot";
  return out;
}

}  // namespace mrqc
