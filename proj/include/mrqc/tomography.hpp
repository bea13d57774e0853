#pragma once
// Pauli-basis state tomography, superoperator process tomography, chi-matrix
// conversion, average gate fidelity with local-phase compensation, readout
// misassignment correction and shot sampling.
//
// Conventions: qubit 0 is the most significant tensor factor and the most
// significant bit of joint outcome indices. Outcome 0 of an axis measurement is
// the +1 eigenvalue. Pauli strings are indexed base 4 with {I, X, Y, Z} =
// {0, 1, 2, 3}, qubit 0 as the most significant digit.

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mrqc/analysis.hpp"
#include "mrqc/dynamics.hpp"
#include "mrqc/errors.hpp"
#include "mrqc/qstate.hpp"

namespace mrqc {

using AxisSetting = std::vector<Axis>;
using OutcomeTable = std::map<AxisSetting, std::vector<double>>;  // joint outcome probabilities per setting

inline int ipow(int b, int e) {
  int r = 1;
  while (e-- > 0) r *= b;
  return r;
}

/// Digits of `index` in base `base`, most significant first.
inline std::vector<int> digits(int index, int base, int n) {
  std::vector<int> d(static_cast<size_t>(n));
  for (int q = n - 1; q >= 0; --q) {
    d[static_cast<size_t>(q)] = index % base;
    index /= base;
  }
  return d;
}

inline CMatrix pauli_string(int index, int n) {
  CMatrix m = CMatrix::Identity(1, 1);
  for (int k : digits(index, 4, n)) m = kron(m, ops::pauli(k));
  return m;
}

inline std::string pauli_label(int index, int n) {
  static const char names[] = {'I', 'X', 'Y', 'Z'};
  std::string s;
  for (int k : digits(index, 4, n)) s += names[k];
  return s;
}

/// All 3^n measurement settings, x < y < z per qubit, qubit 0 most significant.
inline std::vector<AxisSetting> all_axis_settings(int n) {
  std::vector<AxisSetting> out;
  for (int i = 0; i < ipow(3, n); ++i) {
    AxisSetting s;
    for (int d : digits(i, 3, n)) s.push_back(static_cast<Axis>(d));
    out.push_back(s);
  }
  return out;
}

/// Exact joint outcome probabilities of measuring `rho` (n qubits) along `axes`.
inline std::vector<double> exact_outcomes(const CMatrix& rho, const AxisSetting& axes) {
  const int n = static_cast<int>(axes.size());
  const SpaceLayout l(std::vector<int>(static_cast<size_t>(n), 2));
  std::vector<double> p(static_cast<size_t>(1 << n));
  for (int o = 0; o < (1 << n); ++o) {
    CMatrix proj = CMatrix::Identity(1, 1);
    for (int q = 0; q < n; ++q) proj = kron(proj, axis_projectors(axes[static_cast<size_t>(q)], 2)[static_cast<size_t>((o >> (n - 1 - q)) & 1)]);
    p[static_cast<size_t>(o)] = (proj * rho).trace().real();
  }
  return p;
}

inline OutcomeTable exact_outcome_table(const CMatrix& rho, int n) {
  OutcomeTable t;
  for (const auto& s : all_axis_settings(n)) t[s] = exact_outcomes(rho, s);
  return t;
}

/// Linear-inversion state tomography: rho = 2^-n sum_sigma <sigma> sigma.
/// Each Pauli expectation averages every setting compatible with it.
inline CMatrix state_tomography(const OutcomeTable& table, int n) {
  const int d = 1 << n;
  for (const auto& s : all_axis_settings(n))
    if (!table.count(s)) throw DomainError("state_tomography: missing measurement setting");
  CMatrix rho = CMatrix::Zero(d, d);
  for (int idx = 0; idx < ipow(4, n); ++idx) {
    const std::vector<int> sigma = digits(idx, 4, n);
    double sum = 0.0;
    int count = 0;
    for (const auto& [axes, probs] : table) {
      if (static_cast<int>(axes.size()) != n || static_cast<int>(probs.size()) != d)
        throw DimensionError("state_tomography: setting size mismatch");
      bool compatible = true;
      for (int q = 0; q < n; ++q)
        if (sigma[static_cast<size_t>(q)] != 0 && static_cast<int>(axes[static_cast<size_t>(q)]) != sigma[static_cast<size_t>(q)] - 1)
          compatible = false;
      if (!compatible) continue;
      double e = 0.0;
      for (int o = 0; o < d; ++o) {
        int sign = 1;
        for (int q = 0; q < n; ++q)
          if (sigma[static_cast<size_t>(q)] != 0 && ((o >> (n - 1 - q)) & 1)) sign = -sign;
        e += sign * probs[static_cast<size_t>(o)];
      }
      sum += e;
      ++count;
    }
    rho += (sum / count) * pauli_string(idx, n);
  }
  rho /= static_cast<double>(d);
  return 0.5 * (rho + rho.adjoint());
}

// ---------------------------------------------------------------------------
// Process tomography

/// All 4^n input label tuples, qubit 0 most significant.
inline std::vector<std::vector<PrepLabel>> all_input_labels(int n) {
  std::vector<std::vector<PrepLabel>> out;
  for (int i = 0; i < ipow(4, n); ++i) {
    std::vector<PrepLabel> s;
    for (int d : digits(i, 4, n)) s.push_back(static_cast<PrepLabel>(d));
    out.push_back(s);
  }
  return out;
}

inline CMatrix input_density(const std::vector<PrepLabel>& labels) {
  CVector psi = CVector::Ones(1);
  for (auto l : labels) {
    const CVector k = prep_state(l);
    CVector next(psi.size() * 2);
    for (Eigen::Index i = 0; i < psi.size(); ++i) next.segment(2 * i, 2) = psi(i) * k;
    psi = next;
  }
  return psi * psi.adjoint();
}

/// E = Lambda_out Lambda_in^-1 with vectorized states as columns.
inline SuperOperator process_tomography(const std::vector<CMatrix>& inputs, const std::vector<CMatrix>& outputs) {
  if (inputs.size() != outputs.size() || inputs.empty()) throw DimensionError("process_tomography: need matching state lists");
  const Eigen::Index d2 = inputs[0].size();
  if (static_cast<Eigen::Index>(inputs.size()) != d2) throw DimensionError("process_tomography: need d^2 input states");
  CMatrix lin(d2, d2), lout(d2, d2);
  for (size_t k = 0; k < inputs.size(); ++k) {
    lin.col(static_cast<Eigen::Index>(k)) = vectorize(inputs[k]);
    lout.col(static_cast<Eigen::Index>(k)) = vectorize(outputs[k]);
  }
  Eigen::JacobiSVD<CMatrix> svd(lin);
  const auto sv = svd.singularValues();
  if (sv(sv.size() - 1) <= 0.0 || sv(0) / sv(sv.size() - 1) > 1e8)
    throw DomainError("process_tomography: input states are (nearly) linearly dependent");
  const int d = static_cast<int>(std::lround(std::sqrt(static_cast<double>(d2))));
  return SuperOperator(d, CMatrix(lout * lin.inverse()));
}

namespace detail {

/// Reshuffles a column-stacked superoperator into the matrix
/// C = sum_ij chi_ij vec(P_i) vec(P_j)^dagger, and back (the map is an involution).
inline CMatrix reshuffle(const CMatrix& m, int d) {
  CMatrix out(d * d, d * d);
  for (int i1 = 0; i1 < d; ++i1)
    for (int j1 = 0; j1 < d; ++j1)
      for (int i2 = 0; i2 < d; ++i2)
        for (int j2 = 0; j2 < d; ++j2) out(i1 + d * i2, j1 + d * j2) = m(i1 + d * j1, i2 + d * j2);
  return out;
}

inline CMatrix pauli_vec_basis(int n) {
  const int d = 1 << n, nb = ipow(4, n);
  CMatrix v(d * d, nb);
  for (int k = 0; k < nb; ++k) v.col(k) = vectorize(pauli_string(k, n));
  return v;
}

}  // namespace detail

/// chi with E(rho) = sum_ij chi_ij P_i rho P_j, i.e. E = sum_ij chi_ij (P_j^* (x) P_i).
/// The tensor-Pauli family is orthogonal, so the linear system is solved by projection.
inline CMatrix superop_to_chi(const CMatrix& e, int n) {
  const int d = 1 << n;
  if (e.rows() != d * d || e.cols() != d * d) throw DimensionError("superop_to_chi: size mismatch");
  const CMatrix v = detail::pauli_vec_basis(n);
  return v.adjoint() * detail::reshuffle(e, d) * v / static_cast<double>(d * d);
}

inline CMatrix chi_to_superop(const CMatrix& chi, int n) {
  const int d = 1 << n;
  if (chi.rows() != ipow(4, n) || chi.cols() != ipow(4, n)) throw DimensionError("chi_to_superop: size mismatch");
  const CMatrix v = detail::pauli_vec_basis(n);
  return detail::reshuffle(v * chi * v.adjoint(), d);
}

/// F = (d + Tr(E_ideal^dagger E)) / (d (d + 1)). With `daggerless`, Tr(E E_ideal).
inline double average_gate_fidelity(const CMatrix& e, const CMatrix& u_target, bool daggerless = false) {
  const Eigen::Index d = u_target.rows();
  if (e.rows() != d * d) throw DimensionError("average_gate_fidelity: size mismatch");
  const CMatrix ideal = superop_from_unitary(u_target).entries;
  const cplx tr = daggerless ? (e * ideal).trace() : (ideal.adjoint() * e).trace();
  return (static_cast<double>(d) + tr.real()) / static_cast<double>(d * (d + 1));
}

/// R^z(phi) on n qubits: (x)_q diag(e^{-i phi_q/2}, e^{i phi_q/2}).
inline CMatrix z_rotations(const std::vector<double>& phi) {
  CMatrix m = CMatrix::Identity(1, 1);
  for (double p : phi) m = kron(m, ops::rotation({0, 0, 1}, p));
  return m;
}

struct PhaseCompensation {
  std::vector<double> phases;
  double fidelity = 0.0;
};

/// Maximizes average_gate_fidelity over targets R^z(phi) U: a 32^n grid, then Newton ascent.
inline PhaseCompensation compensate_local_phases(const CMatrix& e, const CMatrix& u_target, int n, int grid = 32) {
  const int d = 1 << n;
  if (u_target.rows() != d) throw DimensionError("compensate_local_phases: target size mismatch");
  // Tr(S(R U)^dagger E) = sum_k conj(D_k(phi)) w_k with w = diag(E S(U)^dagger) and
  // D_k = exp(i sum_q phi_q (a_q - b_q)) for k = a + d b.
  const CVector w = (e * superop_from_unitary(u_target).entries.adjoint()).diagonal();
  std::vector<std::vector<int>> m(static_cast<size_t>(d * d), std::vector<int>(static_cast<size_t>(n)));
  for (int a = 0; a < d; ++a)
    for (int b = 0; b < d; ++b)
      for (int q = 0; q < n; ++q)
        m[static_cast<size_t>(a + d * b)][static_cast<size_t>(q)] = ((a >> (n - 1 - q)) & 1) - ((b >> (n - 1 - q)) & 1);
  auto eval = [&](const std::vector<double>& phi, Eigen::VectorXd* grad, Eigen::MatrixXd* hess) {
    double f = 0.0;
    if (grad) *grad = Eigen::VectorXd::Zero(n);
    if (hess) *hess = Eigen::MatrixXd::Zero(n, n);
    for (int k = 0; k < d * d; ++k) {
      const auto& mk = m[static_cast<size_t>(k)];
      double arg = 0.0;
      for (int q = 0; q < n; ++q) arg += phi[static_cast<size_t>(q)] * mk[static_cast<size_t>(q)];
      const cplx t = std::exp(-kI * arg) * w(k);
      f += t.real();
      if (grad)
        for (int q = 0; q < n; ++q) (*grad)(q) += (-kI * static_cast<double>(mk[static_cast<size_t>(q)]) * t).real();
      if (hess)
        for (int q = 0; q < n; ++q)
          for (int r = 0; r < n; ++r) (*hess)(q, r) -= mk[static_cast<size_t>(q)] * mk[static_cast<size_t>(r)] * t.real();
    }
    return f;
  };
  std::vector<double> best(static_cast<size_t>(n), 0.0), phi(static_cast<size_t>(n));
  double fbest = -INFINITY;
  for (int i = 0; i < ipow(grid, n); ++i) {
    const auto dg = digits(i, grid, n);
    for (int q = 0; q < n; ++q) phi[static_cast<size_t>(q)] = kTwoPi * dg[static_cast<size_t>(q)] / grid;
    const double f = eval(phi, nullptr, nullptr);
    if (f > fbest) {
      fbest = f;
      best = phi;
    }
  }
  for (int it = 0; it < 100; ++it) {
    Eigen::VectorXd g;
    Eigen::MatrixXd h;
    eval(best, &g, &h);
    Eigen::VectorXd step = -h.ldlt().solve(g);
    if (!step.allFinite() || g.dot(step) <= 0.0) step = 1e-3 * g;  // not a local maximum yet
    double scale = 1.0;
    bool moved = false;
    for (int k = 0; k < 40; ++k, scale *= 0.5) {
      std::vector<double> cand = best;
      for (int q = 0; q < n; ++q) cand[static_cast<size_t>(q)] += scale * step(q);
      const double f = eval(cand, nullptr, nullptr);
      if (f > fbest) {
        fbest = f;
        best = cand;
        moved = true;
        break;
      }
    }
    if (!moved || g.norm() < 1e-13) break;
  }
  for (auto& p : best) {
    p = std::fmod(p, kTwoPi);
    if (p < 0) p += kTwoPi;
  }
  return {best, average_gate_fidelity(e, z_rotations(best) * u_target)};
}

// ---------------------------------------------------------------------------
// Readout

struct MisassignmentModel {
  double f_g = 1.0, f_e = 1.0;

  void validate() const {
    if (!(f_g > 0.5 && f_g <= 1.0 && f_e > 0.5 && f_e <= 1.0)) throw DomainError("misassignment: f_g, f_e must lie in (0.5, 1]");
  }
  Eigen::Matrix2d confusion() const {
    Eigen::Matrix2d c;
    c << f_g, 1.0 - f_e, 1.0 - f_g, f_e;
    return c;
  }
  bool is_identity() const { return f_g == 1.0 && f_e == 1.0; }
};

namespace detail {

/// Applies a 2x2 matrix to every qubit of a joint distribution over n bits.
inline std::vector<double> apply_per_qubit(const std::vector<double>& p, const Eigen::Matrix2d& c) {
  const size_t size = p.size();
  int n = 0;
  while ((size_t{1} << n) < size) ++n;
  if ((size_t{1} << n) != size) throw DimensionError("readout: distribution size must be a power of two");
  std::vector<double> out = p;
  for (int q = 0; q < n; ++q) {
    const size_t bit = size_t{1} << (n - 1 - q);
    for (size_t i = 0; i < size; ++i) {
      if (i & bit) continue;
      const double a = out[i], b = out[i | bit];
      out[i] = c(0, 0) * a + c(0, 1) * b;
      out[i | bit] = c(1, 0) * a + c(1, 1) * b;
    }
  }
  return out;
}

}  // namespace detail

inline std::vector<double> apply_misassignment(const std::vector<double>& p, const MisassignmentModel& m) {
  m.validate();
  return detail::apply_per_qubit(p, m.confusion());
}

struct CorrectedPopulations {
  std::vector<double> p;
  double violation = 0.0;  // total negative mass before clipping
};

/// p = C^-1 p' per qubit. Small negative excursions (< 0.05 in total) are
/// clipped and the result renormalized; larger ones raise DomainError.
inline CorrectedPopulations correct_misassignment(const std::vector<double>& raw, const MisassignmentModel& m,
                                                  double max_violation = 0.05) {
  m.validate();
  if (m.f_g + m.f_e <= 1.0) throw DomainError("misassignment: confusion matrix not invertible");
  CorrectedPopulations out{detail::apply_per_qubit(raw, m.confusion().inverse()), 0.0};
  for (double v : out.p)
    if (v < 0.0) out.violation -= v;
  if (out.violation >= max_violation) throw DomainError("misassignment: corrected populations inconsistent");
  if (out.violation > 0.0) {
    double total = 0.0;
    for (double& v : out.p) total += (v = std::max(0.0, v));
    for (double& v : out.p) v /= total;
  }
  return out;
}

/// Multinomial sample of `shots` outcomes, returned as frequencies.
inline std::vector<double> sample_frequencies(const std::vector<double>& p, int shots, std::mt19937_64& rng) {
  std::vector<double> w(p.size());
  for (size_t i = 0; i < p.size(); ++i) w[i] = std::max(0.0, p[i]);
  std::discrete_distribution<size_t> dist(w.begin(), w.end());
  std::vector<double> f(p.size(), 0.0);
  for (int s = 0; s < shots; ++s) f[dist(rng)] += 1.0;
  for (double& v : f) v /= shots;
  return f;
}

// ---------------------------------------------------------------------------
// Repetition fit

struct RepetitionFit {
  double fidelity = 1.0, sigma = 0.0, A = 0.0, B = 0.0;
};

/// Fits F(N) = A f^N + B; flat data mean f = 1.
inline RepetitionFit repeated_gate_fidelity(const std::vector<double>& f_of_n, const std::vector<double>& n_values) {
  if (f_of_n.size() != n_values.size()) throw DimensionError("repeated_gate_fidelity: size mismatch");
  std::vector<double> sorted = n_values;
  std::sort(sorted.begin(), sorted.end());
  if (std::unique(sorted.begin(), sorted.end()) - sorted.begin() < 4) throw FitError("repeated_gate_fidelity: need >= 4 distinct N");
  if (is_flat(f_of_n, 1e-10)) return {1.0, 0.0, 0.0, f_of_n.front()};
  const ExpFit e = exp_fit(n_values, f_of_n);
  return {e.p, e.sigma_p, e.A, e.c};
}

}  // namespace mrqc
