#pragma once
// Device parameters, JC Hamiltonians and collapse operators.
//
// Config files carry frequencies in Hz and times in seconds; every quantity
// handed to the dynamics is angular (rad/s).

#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "mrqc/errors.hpp"
#include "mrqc/qstate.hpp"

namespace mrqc {

struct ModeSpec {
  int label = 0;
  double frequency_hz = 0.0;
  double t1 = 0.0;  // s
  double t2 = 0.0;  // s
  int truncation = 3;
};

struct DeviceParams {
  double g_hz = 0.0;
  double rest_frequency_hz = 0.0;
  double fsr_hz = 0.0;  // informational
  double readout_resonator_hz = 0.0;  // informational
  double transmon_t1 = 0.0;
  double transmon_t2 = 0.0;
  std::vector<ModeSpec> modes;

  double g() const { return kTwoPi * g_hz; }
  int num_modes() const { return static_cast<int>(modes.size()); }

  const ModeSpec& mode(int index) const {
    if (index < 0 || index >= num_modes()) throw DimensionError("unknown mode index " + std::to_string(index));
    return modes[static_cast<size_t>(index)];
  }

  /// omega_mode - omega_rest, rad/s.
  double mode_offset(int index) const { return kTwoPi * (mode(index).frequency_hz - rest_frequency_hz); }

  void validate() const {
    if (!(g_hz > 0.0)) throw CalibrationError("coupling g must be positive");
    if (!(transmon_t1 > 0.0) || !(transmon_t2 > 0.0)) throw CalibrationError("transmon T1/T2 must be positive");
    if (transmon_t2 > 2.0 * transmon_t1) throw CalibrationError("transmon T2 exceeds 2*T1");
    for (const auto& m : modes) {
      const std::string name = "mode " + std::to_string(m.label);
      if (!(m.t1 > 0.0) || !(m.t2 > 0.0)) throw CalibrationError(name + ": T1/T2 must be positive");
      if (m.t2 > 2.0 * m.t1) throw CalibrationError(name + ": T2 exceeds 2*T1");
      if (m.truncation < 3) throw CalibrationError(name + ": truncation must be >= 3");
      if (!(m.frequency_hz > rest_frequency_hz))
        throw CalibrationError(name + ": frequency must lie above the transmon rest point");
    }
  }

  /// A mode used only as a sink for discarded or reset transmon states. It is
  /// placed one free spectral range above the highest mode and inherits the
  /// longest-lived mode's coherence; the state it receives is never read.
  ModeSpec auxiliary_mode() const {
    ModeSpec aux;
    aux.label = 0;
    double top = rest_frequency_hz;
    for (const auto& m : modes) {
      top = std::max(top, m.frequency_hz);
      if (m.t1 > aux.t1) {
        aux.t1 = m.t1;
        aux.t2 = m.t2;
      }
    }
    aux.frequency_hz = top + (fsr_hz > 0.0 ? fsr_hz : 10.0 * g_hz);
    aux.truncation = 3;
    if (aux.t1 == 0.0) {
      aux.t1 = transmon_t1;
      aux.t2 = transmon_t2;
    }
    return aux;
  }
};

inline void to_json(nlohmann::json& j, const ModeSpec& m) {
  j = {{"label", m.label}, {"frequency_hz", m.frequency_hz}, {"t1_s", m.t1}, {"t2_s", m.t2},
       {"truncation", m.truncation}};
}
inline void from_json(const nlohmann::json& j, ModeSpec& m) {
  m.label = j.at("label").get<int>();
  m.frequency_hz = j.at("frequency_hz").get<double>();
  m.t1 = j.at("t1_s").get<double>();
  m.t2 = j.at("t2_s").get<double>();
  m.truncation = j.value("truncation", 3);
}
inline void to_json(nlohmann::json& j, const DeviceParams& p) {
  j = {{"g_hz", p.g_hz},
       {"rest_frequency_hz", p.rest_frequency_hz},
       {"fsr_hz", p.fsr_hz},
       {"readout_resonator_hz", p.readout_resonator_hz},
       {"transmon", {{"t1_s", p.transmon_t1}, {"t2_s", p.transmon_t2}}},
       {"modes", p.modes}};
}
inline void from_json(const nlohmann::json& j, DeviceParams& p) {
  p.g_hz = j.at("g_hz").get<double>();
  p.rest_frequency_hz = j.at("rest_frequency_hz").get<double>();
  p.fsr_hz = j.value("fsr_hz", 0.0);
  p.readout_resonator_hz = j.value("readout_resonator_hz", 0.0);
  p.transmon_t1 = j.at("transmon").at("t1_s").get<double>();
  p.transmon_t2 = j.at("transmon").at("t2_s").get<double>();
  p.modes = j.at("modes").get<std::vector<ModeSpec>>();
}

inline DeviceParams parse_device(const std::string& text) {
  DeviceParams p;
  try {
    p = nlohmann::json::parse(text).get<DeviceParams>();
  } catch (const nlohmann::json::exception& e) {
    throw CalibrationError(std::string("invalid device file: ") + e.what());
  }
  p.validate();
  return p;
}

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline DeviceParams load_device(const std::string& path) { return parse_device(read_text_file(path)); }

#ifdef MRQC_DEFAULT_DEVICE
inline DeviceParams default_device() { return load_device(MRQC_DEFAULT_DEVICE); }
#endif

// ---------------------------------------------------------------------------
// Hamiltonians

/// Hamiltonian of the transmon coupled to a set of modes at one instant.
///
/// `drift` is written in the frame co-rotating with the transmon's current
/// frequency: -sum_i Delta_i a_i^dag a_i + g sum_i (s+ a_i + s- a_i^dag) with
/// Delta_i = omega_q - omega_i. The rest-point frame used for schedule
/// simulation differs by the conserved excitation number times the transmon
/// shift; `rest_frame_drift()` returns that form.
struct FrameHamiltonian {
  SpaceLayout layout;
  OperatorMatrix drift;
  std::vector<double> detunings;  // Delta_i, rad/s
  double transmon_shift = 0.0;    // omega_q - omega_rest, rad/s

  CMatrix excitation_number() const {
    CMatrix n = embed(layout, 0, ops::number(2));
    for (int k = 1; k < layout.num_factors(); ++k) n += embed(layout, k, ops::number(layout.factor(k)));
    return n;
  }
  CMatrix rest_frame_drift() const { return drift.entries + transmon_shift * excitation_number(); }
};

inline FrameHamiltonian build_jc_hamiltonian(const DeviceParams& params, const std::vector<int>& active_modes,
                                             double transmon_frequency_hz) {
  if (active_modes.empty()) throw DimensionError("build_jc_hamiltonian: no active modes");
  std::vector<int> factors{2};
  for (int m : active_modes) factors.push_back(params.mode(m).truncation);
  SpaceLayout layout(factors);

  const double g = params.g();
  const double wq = kTwoPi * transmon_frequency_hz;
  const CMatrix sp = embed(layout, 0, ops::annihilation(2).adjoint());
  CMatrix h = CMatrix::Zero(layout.total_dim(), layout.total_dim());
  std::vector<double> detunings;
  for (size_t k = 0; k < active_modes.size(); ++k) {
    const int f = static_cast<int>(k) + 1;
    const double delta = wq - kTwoPi * params.mode(active_modes[k]).frequency_hz;
    detunings.push_back(delta);
    const CMatrix a = embed(layout, f, ops::annihilation(layout.factor(f)));
    h += -delta * (a.adjoint() * a);
    h += g * (sp * a + sp.adjoint() * a.adjoint());
  }
  FrameHamiltonian out;
  out.layout = layout;
  out.drift = OperatorMatrix(layout, h);
  out.detunings = std::move(detunings);
  out.transmon_shift = kTwoPi * (transmon_frequency_hz - params.rest_frequency_hz);
  return out;
}

// ---------------------------------------------------------------------------
// Decoherence

/// Which subsystems keep their decoherence channels.
struct CoherenceFlags {
  bool transmon = true;
  bool phonons = true;

  static CoherenceFlags none() { return {false, false}; }
  static CoherenceFlags full() { return {true, true}; }
};

/// Pure-dephasing operator form. `coherence_rate`: L = sqrt(2/T_phi) n, so the
/// 0-1 coherence decays at exactly 1/T_phi. `sigma_z_rate`: L = sqrt(1/T_phi)
/// sigma_z, i.e. 2 sqrt(1/T_phi) n on every level, a common convention in which the
/// coherence decays twice as fast.
enum class DephasingConvention { coherence_rate, sigma_z_rate };

enum class ChannelKind { amplitude_damping, dephasing };

struct CollapseOperator {
  ChannelKind kind = ChannelKind::amplitude_damping;
  int subsystem = 0;  // 0 = transmon, k >= 1 = k-th active mode
  double rate = 0.0;  // 1/T1 or 1/T_phi, 1/s
  OperatorMatrix op;  // already scaled, enters the master equation as L rho L^dag
};

/// 1/T_phi = 1/T2 - 1/(2 T1).
inline double pure_dephasing_rate(double t1, double t2) {
  if (t2 > 2.0 * t1 * (1.0 + 1e-12)) throw CalibrationError("non-physical coherence: T2 > 2*T1");
  return std::max(0.0, 1.0 / t2 - 1.0 / (2.0 * t1));
}

/// Collapse operators for one subsystem of dimension d with the given times.
inline std::vector<CMatrix> local_collapse_operators(int d, double t1, double t2, DephasingConvention conv) {
  std::vector<CMatrix> out;
  if (std::isfinite(t1) && t1 > 0.0) out.push_back(std::sqrt(1.0 / t1) * ops::annihilation(d));
  if (std::isfinite(t2) && t2 > 0.0) {
    const double gphi = pure_dephasing_rate(t1, t2);
    if (gphi > 0.0) {
      const double scale = conv == DephasingConvention::coherence_rate ? 1.0 : std::sqrt(2.0);
      out.push_back(std::sqrt(2.0 * gphi) * scale * ops::number(d));
    }
  }
  return out;
}

inline std::vector<CollapseOperator> collapse_operators(const DeviceParams& params, const std::vector<int>& active_modes,
                                                        CoherenceFlags flags = CoherenceFlags::full(),
                                                        DephasingConvention conv = DephasingConvention::coherence_rate) {
  std::vector<int> factors{2};
  for (int m : active_modes) factors.push_back(params.mode(m).truncation);
  SpaceLayout layout(factors);

  std::vector<CollapseOperator> out;
  auto add = [&](int sub, double t1, double t2) {
    const int d = layout.factor(sub);
    const double gphi = pure_dephasing_rate(t1, t2);
    out.push_back({ChannelKind::amplitude_damping, sub, 1.0 / t1,
                   OperatorMatrix(layout, embed(layout, sub, std::sqrt(1.0 / t1) * ops::annihilation(d)))});
    const double scale = conv == DephasingConvention::coherence_rate ? 1.0 : std::sqrt(2.0);
    out.push_back({ChannelKind::dephasing, sub, gphi,
                   OperatorMatrix(layout, embed(layout, sub, std::sqrt(2.0 * gphi) * scale * ops::number(d)))});
  };
  if (flags.transmon) add(0, params.transmon_t1, params.transmon_t2);
  if (flags.phonons) {
    for (size_t k = 0; k < active_modes.size(); ++k) {
      const auto& m = params.mode(active_modes[k]);
      add(static_cast<int>(k) + 1, m.t1, m.t2);
    }
  }
  return out;
}

/// Inverts the dressed splitting Delta' = sqrt(Delta^2 + 4 g^2).
inline double dispersive_detuning(double measured_detuning, double g) {
  const double m = std::abs(measured_detuning);
  if (m < 2.0 * g) throw CalibrationError("measured detuning below the 2g dressed-state minimum");
  const double d = std::sqrt(std::max(0.0, m * m - 4.0 * g * g));
  return measured_detuning < 0.0 ? -d : d;
}

}  // namespace mrqc
