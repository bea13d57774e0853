#pragma once
// Closed-form Jaynes-Cummings blocks, piecewise-constant propagation (unitary
// and Lindblad), and projective transmon measurement.

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include <unsupported/Eigen/MatrixFunctions>

#include "mrqc/errors.hpp"
#include "mrqc/qstate.hpp"

namespace mrqc {

// ---------------------------------------------------------------------------
// Closed forms

/// Evolution of the two-state block {|e,n-1>, |g,n>} under
/// H = Delta s+s- + g (s+ a + s- a^dag), in the frame of the phonon mode.
struct AnalyticBlockUnitary {
  int n = 1;
  double delta = 0.0;
  double g = 0.0;
  double t = 0.0;
  Eigen::Matrix2cd entries = Eigen::Matrix2cd::Identity();
};

inline AnalyticBlockUnitary analytic_block(int n, double delta, double g, double t) {
  if (n < 1) throw DimensionError("analytic_block: n must be >= 1");
  if (t < 0.0) throw DomainError("analytic_block: negative time");
  const double wn = std::sqrt(delta * delta + 4.0 * g * g * n);
  AnalyticBlockUnitary out{n, delta, g, t, Eigen::Matrix2cd::Identity()};
  if (wn == 0.0) return out;
  const double c = std::cos(0.5 * wn * t), s = std::sin(0.5 * wn * t);
  const cplx pre = std::exp(-kI * (0.5 * delta * t));
  const cplx diag = c - kI * (delta / wn) * s;
  const cplx off = -2.0 * kI * (g * std::sqrt(static_cast<double>(n)) / wn) * s;
  out.entries << pre * diag, pre * off, pre * off, pre * std::conj(diag);
  return out;
}

/// Index of |q, m> in a transmon (x) single-mode layout, transmon most significant.
inline int jc_index(int truncation, int q, int m) { return q * truncation + m; }

/// Full transmon-mode unitary assembled from the closed-form blocks.
///
/// |g0> carries no phase; blocks n = 1..max_n sit on (|e,n-1>, |g,n>). Any
/// state outside those blocks evolves freely (|e,m> picks up e^{-i Delta t}).
inline OperatorMatrix assemble_offres_unitary(const SpaceLayout& layout, double delta, double g, double t,
                                              int max_n = -1) {
  if (layout.num_factors() != 2 || layout.factor(0) != 2)
    throw DimensionError("assemble_offres_unitary: expects a transmon (x) single-mode layout");
  const int T = layout.factor(1);
  if (max_n < 0) max_n = T - 1;
  if (max_n > T - 1) throw DimensionError("assemble_offres_unitary: truncation too small for max_n");
  const int d = layout.total_dim();
  CMatrix u = CMatrix::Zero(d, d);
  u(jc_index(T, 0, 0), jc_index(T, 0, 0)) = 1.0;
  std::vector<bool> covered(static_cast<size_t>(d), false);
  covered[static_cast<size_t>(jc_index(T, 0, 0))] = true;
  for (int n = 1; n <= max_n; ++n) {
    const auto b = analytic_block(n, delta, g, t);
    const int ie = jc_index(T, 1, n - 1), ig = jc_index(T, 0, n);
    u(ie, ie) = b.entries(0, 0);
    u(ie, ig) = b.entries(0, 1);
    u(ig, ie) = b.entries(1, 0);
    u(ig, ig) = b.entries(1, 1);
    covered[static_cast<size_t>(ie)] = covered[static_cast<size_t>(ig)] = true;
  }
  for (int i = 0; i < d; ++i) {
    if (covered[static_cast<size_t>(i)]) continue;
    u(i, i) = (i >= T) ? std::exp(-kI * delta * t) : cplx(1.0);
  }
  return OperatorMatrix(layout, u);
}

// ---------------------------------------------------------------------------
// Numerical propagation

struct HamiltonianSegment {
  CMatrix h;
  double duration = 0.0;
};

struct PropagationResult {
  DensityMatrix final_state;
  std::vector<double> times;
  std::vector<std::vector<double>> record;  // record[k][i] = <observable k> at times[i]
};

namespace detail {

inline void check_hermitian(const CMatrix& h, const char* who) {
  if (hermiticity_error(h) > 1e-9 * std::max(1.0, h.cwiseAbs().maxCoeff()))
    throw DomainError(std::string(who) + ": Hamiltonian is not Hermitian");
}

inline void record_expectations(const CMatrix& rho, const std::vector<CMatrix>& observables, double t,
                                PropagationResult& out) {
  out.times.push_back(t);
  for (size_t k = 0; k < observables.size(); ++k)
    out.record[k].push_back((observables[k] * rho).trace().real());
}

inline int step_count(double duration, double dt) {
  if (duration <= 0.0) return 0;
  return std::max(1, static_cast<int>(std::ceil(duration / dt - 1e-9)));
}

}  // namespace detail

/// Exact piecewise propagation: each constant segment is sub-divided into
/// steps of at most dt, all sharing one propagator.
inline PropagationResult evolve_unitary(const std::vector<HamiltonianSegment>& segments, const DensityMatrix& rho0,
                                        double dt, const std::vector<CMatrix>& observables = {}) {
  if (!(dt > 0.0)) throw DomainError("evolve_unitary: dt must be positive");
  PropagationResult out{rho0, {}, std::vector<std::vector<double>>(observables.size())};
  CMatrix rho = rho0.entries;
  double t = 0.0;
  detail::record_expectations(rho, observables, t, out);
  for (const auto& seg : segments) {
    if (seg.h.rows() != rho.rows()) throw DimensionError("evolve_unitary: segment dimension mismatch");
    detail::check_hermitian(seg.h, "evolve_unitary");
    const int steps = detail::step_count(seg.duration, dt);
    if (steps == 0) continue;
    const double h = seg.duration / steps;
    const CMatrix u = unitary_propagator(seg.h, h);
    for (int s = 0; s < steps; ++s) {
      rho = u * rho * u.adjoint();
      t += h;
      detail::record_expectations(rho, observables, t, out);
    }
  }
  out.final_state = DensityMatrix(rho0.layout, rho);
  return out;
}

/// Right-hand side of the Lindblad master equation.
inline CMatrix lindblad_rhs(const CMatrix& h, const std::vector<CMatrix>& ls, const std::vector<CMatrix>& ldl,
                            const CMatrix& rho) {
  CMatrix out = -kI * (h * rho - rho * h);
  for (size_t k = 0; k < ls.size(); ++k) {
    out += ls[k] * rho * ls[k].adjoint();
    out -= 0.5 * (ldl[k] * rho + rho * ldl[k]);
  }
  return out;
}

/// Largest angular frequency present in a Hamiltonian (its spectral width).
inline double spectral_width(const CMatrix& h) {
  Eigen::SelfAdjointEigenSolver<CMatrix> es(0.5 * (h + h.adjoint()), Eigen::EigenvaluesOnly);
  const auto& ev = es.eigenvalues();
  return ev.size() ? ev(ev.size() - 1) - ev(0) : 0.0;
}

/// Fixed-step RK4 integration of the Lindblad equation.
///
/// Step guard: dt must not exceed 1% of the shortest oscillation period in any
/// segment, and dt times the total dissipation rate must stay below 0.1.
inline PropagationResult evolve_lindblad(const std::vector<HamiltonianSegment>& segments,
                                         const std::vector<CMatrix>& collapse, const DensityMatrix& rho0, double dt,
                                         const std::vector<CMatrix>& observables = {}) {
  if (!(dt > 0.0)) throw DomainError("evolve_lindblad: dt must be positive");
  std::vector<CMatrix> ldl;
  double decay_scale = 0.0;
  for (const auto& l : collapse) {
    if (l.rows() != rho0.dim()) throw DimensionError("evolve_lindblad: collapse operator dimension mismatch");
    ldl.push_back(l.adjoint() * l);
    decay_scale += ldl.back().cwiseAbs().maxCoeff();
  }
  if (dt * decay_scale > 0.1) throw DomainError("evolve_lindblad: step too coarse for the dissipation rates");

  PropagationResult out{rho0, {}, std::vector<std::vector<double>>(observables.size())};
  CMatrix rho = rho0.entries;
  double t = 0.0;
  detail::record_expectations(rho, observables, t, out);
  for (const auto& seg : segments) {
    if (seg.h.rows() != rho.rows()) throw DimensionError("evolve_lindblad: segment dimension mismatch");
    detail::check_hermitian(seg.h, "evolve_lindblad");
    const double width = spectral_width(seg.h);
    if (width > 0.0 && dt > 0.01 * kTwoPi / width)
      throw DomainError("evolve_lindblad: dt exceeds 1% of the fastest oscillation period");
    const int steps = detail::step_count(seg.duration, dt);
    if (steps == 0) continue;
    const double h = seg.duration / steps;
    for (int s = 0; s < steps; ++s) {
      const CMatrix k1 = lindblad_rhs(seg.h, collapse, ldl, rho);
      const CMatrix k2 = lindblad_rhs(seg.h, collapse, ldl, rho + 0.5 * h * k1);
      const CMatrix k3 = lindblad_rhs(seg.h, collapse, ldl, rho + 0.5 * h * k2);
      const CMatrix k4 = lindblad_rhs(seg.h, collapse, ldl, rho + h * k3);
      rho += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
      t += h;
      detail::record_expectations(rho, observables, t, out);
    }
  }
  out.final_state = DensityMatrix(rho0.layout, rho);
  return out;
}

/// Lindbladian as a matrix on column-stacked density matrices.
inline CMatrix lindblad_generator(const CMatrix& h, const std::vector<CMatrix>& collapse) {
  const int d = static_cast<int>(h.rows());
  const CMatrix id = CMatrix::Identity(d, d);
  CMatrix gen = -kI * (kron(id, h) - kron(h.transpose(), id));
  for (const auto& l : collapse) {
    const CMatrix ldl = l.adjoint() * l;
    gen += kron(l.conjugate(), l);
    gen -= 0.5 * (kron(id, ldl) + kron(ldl.transpose(), id));
  }
  return gen;
}

/// exp(L t) for the Lindbladian above.
inline CMatrix lindblad_propagator(const CMatrix& h, const std::vector<CMatrix>& collapse, double t) {
  if (collapse.empty()) return superop_from_unitary(unitary_propagator(h, t)).entries;
  const CMatrix gen = lindblad_generator(h, collapse) * t;
  return gen.exp();
}

// ---------------------------------------------------------------------------
// Measurement

enum class Axis { x, y, z };

inline Axis parse_axis(char c) {
  switch (c) {
    case 'x': case 'X': return Axis::x;
    case 'y': case 'Y': return Axis::y;
    case 'z': case 'Z': return Axis::z;
    default: throw DomainError(std::string("invalid measurement axis '") + c + "'");
  }
}
inline char axis_name(Axis a) { return a == Axis::x ? 'x' : a == Axis::y ? 'y' : 'z'; }

/// Projectors onto the +1 and -1 eigenstates of the Pauli operator along `axis`
/// for a d-level system restricted to its lowest two levels. For d > 2 the
/// "-1" projector also collects every level above |1>.
inline std::array<CMatrix, 2> axis_projectors(Axis axis, int d) {
  const double r = 1.0 / std::sqrt(2.0);
  CVector plus = CVector::Zero(d), minus = CVector::Zero(d);
  switch (axis) {
    case Axis::z: plus(0) = 1.0; minus(1) = 1.0; break;
    case Axis::x: plus(0) = r; plus(1) = r; minus(0) = r; minus(1) = -r; break;
    case Axis::y: plus(0) = r; plus(1) = kI * r; minus(0) = r; minus(1) = -kI * r; break;
  }
  CMatrix p0 = plus * plus.adjoint();
  CMatrix p1 = minus * minus.adjoint();
  for (int k = 2; k < d; ++k) p1(k, k) = 1.0;
  return {p0, p1};
}

struct MeasurementResult {
  std::array<double, 2> probabilities{};  // outcome 0 = +1 eigenvalue (|g> for z)
  std::array<DensityMatrix, 2> post_states;  // normalized; zero matrix when the outcome is impossible
};

inline MeasurementResult projective_measure(const DensityMatrix& rho, int subsystem, Axis axis) {
  if (subsystem < 0 || subsystem >= rho.layout.num_factors())
    throw DimensionError("projective_measure: subsystem out of range");
  if (subsystem != 0) throw DimensionError("projective_measure: only the transmon is read out");
  const auto proj = axis_projectors(axis, rho.layout.factor(subsystem));
  MeasurementResult out;
  for (int k = 0; k < 2; ++k) {
    const CMatrix p = embed(rho.layout, subsystem, proj[static_cast<size_t>(k)]);
    CMatrix post = p * rho.entries * p;
    const double prob = std::max(0.0, post.trace().real());
    out.probabilities[static_cast<size_t>(k)] = prob;
    if (prob > 1e-15) post /= prob;
    else post.setZero();
    out.post_states[static_cast<size_t>(k)] = DensityMatrix(rho.layout, post);
  }
  return out;
}

/// Input-state labels used for preparation and tomography.
enum class PrepLabel { zero, one, plus, plus_i };

inline const char* prep_label_name(PrepLabel l) {
  switch (l) {
    case PrepLabel::zero: return "0";
    case PrepLabel::one: return "1";
    case PrepLabel::plus: return "+";
    case PrepLabel::plus_i: return "i";
  }
  return "?";
}

inline CVector prep_state(PrepLabel l) {
  CVector psi(2);
  const double r = 1.0 / std::sqrt(2.0);
  switch (l) {
    case PrepLabel::zero: psi << 1, 0; break;
    case PrepLabel::one: psi << 0, 1; break;
    case PrepLabel::plus: psi << r, r; break;
    case PrepLabel::plus_i: psi << r, cplx(0, r); break;
  }
  return psi;
}

}  // namespace mrqc
