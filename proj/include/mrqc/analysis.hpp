#pragma once
// Statistical post-processing: least-squares fits, beta-mixture EM peak
// classification, and period extraction for period finding.

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <numeric>
#include <tuple>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/special_functions/digamma.hpp>
#include <boost/math/special_functions/trigamma.hpp>
#include <unsupported/Eigen/NonLinearOptimization>

#include "mrqc/errors.hpp"
#include "mrqc/qstate.hpp"

namespace mrqc {

// ---------------------------------------------------------------------------
// Nonlinear least squares

struct FitResult {
  Eigen::VectorXd params;
  Eigen::MatrixXd covariance;  // s^2 (J^T J)^-1 at the solution
  double rss = 0.0;
  int status = 0;
};

using ScalarModel = std::function<double(const Eigen::VectorXd& p, double x)>;

namespace detail {

struct ModelFunctor {
  using Scalar = double;
  using InputType = Eigen::VectorXd;
  using ValueType = Eigen::VectorXd;
  using JacobianType = Eigen::MatrixXd;
  enum { InputsAtCompileTime = Eigen::Dynamic, ValuesAtCompileTime = Eigen::Dynamic };

  const ScalarModel* model;
  const std::vector<double>* x;
  const std::vector<double>* y;
  int n_params;

  int inputs() const { return n_params; }
  int values() const { return static_cast<int>(x->size()); }
  int operator()(const Eigen::VectorXd& p, Eigen::VectorXd& r) const {
    for (size_t i = 0; i < x->size(); ++i) r(static_cast<Eigen::Index>(i)) = (*model)(p, (*x)[i]) - (*y)[i];
    return 0;
  }
};

inline Eigen::MatrixXd numeric_jacobian(const ScalarModel& f, const Eigen::VectorXd& p, const std::vector<double>& x) {
  Eigen::MatrixXd j(static_cast<Eigen::Index>(x.size()), p.size());
  for (Eigen::Index k = 0; k < p.size(); ++k) {
    const double h = 1e-7 * std::max(1.0, std::abs(p(k)));
    Eigen::VectorXd a = p, b = p;
    a(k) += h;
    b(k) -= h;
    for (size_t i = 0; i < x.size(); ++i) j(static_cast<Eigen::Index>(i), k) = (f(a, x[i]) - f(b, x[i])) / (2.0 * h);
  }
  return j;
}

}  // namespace detail

/// Levenberg-Marquardt fit of y ~ model(p, x) from `init`.
inline FitResult least_squares(const ScalarModel& model, const std::vector<double>& x, const std::vector<double>& y,
                               const Eigen::VectorXd& init) {
  if (x.size() != y.size()) throw DimensionError("least_squares: x and y sizes differ");
  if (x.size() < static_cast<size_t>(init.size())) throw FitError("least_squares: fewer points than parameters");
  detail::ModelFunctor fn{&model, &x, &y, static_cast<int>(init.size())};
  Eigen::NumericalDiff<detail::ModelFunctor> nd(fn);
  Eigen::LevenbergMarquardt<Eigen::NumericalDiff<detail::ModelFunctor>> lm(nd);
  lm.parameters.xtol = 1e-14;
  lm.parameters.ftol = 1e-14;
  lm.parameters.maxfev = 20000;
  FitResult out;
  out.params = init;
  out.status = static_cast<int>(lm.minimize(out.params));
  if (!out.params.allFinite()) throw FitError("least_squares: non-finite parameters");
  Eigen::VectorXd r(static_cast<Eigen::Index>(x.size()));
  fn(out.params, r);
  out.rss = r.squaredNorm();
  const Eigen::MatrixXd j = detail::numeric_jacobian(model, out.params, x);
  const Eigen::Index dof = std::max<Eigen::Index>(1, static_cast<Eigen::Index>(x.size()) - init.size());
  const Eigen::MatrixXd jtj = j.transpose() * j;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(jtj);
  out.covariance = lu.isInvertible() ? Eigen::MatrixXd(lu.inverse() * (out.rss / static_cast<double>(dof)))
                                     : Eigen::MatrixXd::Constant(init.size(), init.size(), NAN);
  return out;
}

struct ExpFit {
  double A = 0.0, p = 1.0, c = 0.0;
  double sigma_p = 0.0;
  double rss = 0.0;
};

inline bool is_flat(const std::vector<double>& y, double tol = 1e-12) {
  const auto [lo, hi] = std::minmax_element(y.begin(), y.end());
  return *hi - *lo <= tol;
}

/// Fits y = A p^x + c. Constant data leave p unidentifiable and raise FitError.
inline ExpFit exp_fit(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw DimensionError("exp_fit: x and y sizes differ");
  if (x.size() < 4) throw FitError("exp_fit: at least 4 points required");
  if (is_flat(y)) throw FitError("exp_fit: constant data, decay rate unidentifiable");
  const ScalarModel model = [](const Eigen::VectorXd& q, double t) { return q(0) * std::pow(q(1), t) + q(2); };

  // Two-point log-ratio start, plus a few fixed decay guesses; keep the best.
  const size_t n = x.size(), mid = n / 2;
  const double c0 = y.back();
  std::vector<double> p_starts{0.5, 0.9, 0.99};
  const double r0 = y.front() - c0, r1 = y[mid] - c0;
  if (r0 != 0.0 && r1 / r0 > 0.0 && x[mid] != x.front())
    p_starts.insert(p_starts.begin(), std::pow(r1 / r0, 1.0 / (x[mid] - x.front())));
  FitResult best;
  best.rss = INFINITY;
  for (double p0 : p_starts) {
    if (!(p0 > 0.0) || !std::isfinite(p0)) continue;
    Eigen::VectorXd init(3);
    init << (y.front() - c0) / std::pow(p0, x.front()), p0, c0;
    try {
      const FitResult f = least_squares(model, x, y, init);
      if (f.rss < best.rss) best = f;
    } catch (const FitError&) {
    }
  }
  if (!std::isfinite(best.rss)) throw FitError("exp_fit: no start converged");
  ExpFit out{best.params(0), best.params(1), best.params(2), std::sqrt(std::max(0.0, best.covariance(1, 1))), best.rss};
  if (!(out.p > 0.0) || out.p > 2.0) throw FitError("exp_fit: diverged");
  return out;
}

/// y = a + b cos x + c sin x by linear least squares.
struct HarmonicFit {
  double a = 0.0, b = 0.0, c = 0.0;
  double amplitude() const { return std::hypot(b, c); }
  double argmax() const { return wrap(std::atan2(c, b)); }
  double argmin() const { return wrap(std::atan2(c, b) + kPi); }
  double operator()(double x) const { return a + b * std::cos(x) + c * std::sin(x); }
  double max_residual = 0.0;

 private:
  static double wrap(double v) {
    double r = std::fmod(v, kTwoPi);
    return r < 0 ? r + kTwoPi : r;
  }
};

inline HarmonicFit fit_first_harmonic(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 3) throw FitError("fit_first_harmonic: need at least 3 points");
  Eigen::MatrixXd m(static_cast<Eigen::Index>(x.size()), 3);
  Eigen::VectorXd v(static_cast<Eigen::Index>(x.size()));
  for (size_t i = 0; i < x.size(); ++i) {
    m.row(static_cast<Eigen::Index>(i)) << 1.0, std::cos(x[i]), std::sin(x[i]);
    v(static_cast<Eigen::Index>(i)) = y[i];
  }
  const Eigen::Vector3d s = m.colPivHouseholderQr().solve(v);
  HarmonicFit f;
  f.a = s(0);
  f.b = s(1);
  f.c = s(2);
  f.max_residual = (m * s - v).cwiseAbs().maxCoeff();
  return f;
}

/// y = a + b exp(-t / tau) cos(2 pi f t + phase); frequency seeded by a DFT scan.
struct CosineFit {
  double frequency = 0.0;  // Hz
  double amplitude = 0.0, offset = 0.0, phase = 0.0, tau = INFINITY;
  double sigma_frequency = 0.0;
};

inline CosineFit fit_damped_cosine(const std::vector<double>& t, const std::vector<double>& y, double min_amplitude = 1e-6) {
  if (t.size() != y.size() || t.size() < 8) throw FitError("fit_damped_cosine: need at least 8 points");
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(y.size());
  double var = 0.0;
  for (double v : y) var += (v - mean) * (v - mean);
  if (std::sqrt(var / static_cast<double>(y.size())) < min_amplitude) throw FitError("fit_damped_cosine: flat signal");
  const double span = t.back() - t.front();
  const double dt = span / static_cast<double>(t.size() - 1);
  const double f_max = 0.5 / dt;
  // Periodogram on a grid four times finer than 1/span.
  double best_f = 0.0, best_p = -1.0;
  for (double f = 0.25 / span; f < f_max; f += 0.25 / span) {
    cplx s = 0.0;
    for (size_t i = 0; i < t.size(); ++i) s += (y[i] - mean) * std::exp(-kI * (kTwoPi * f * t[i]));
    if (std::norm(s) > best_p) {
      best_p = std::norm(s);
      best_f = f;
    }
  }
  cplx s = 0.0;
  for (size_t i = 0; i < t.size(); ++i) s += (y[i] - mean) * std::exp(-kI * (kTwoPi * best_f * t[i]));
  const ScalarModel model = [](const Eigen::VectorXd& q, double x) {
    return q(0) + q(1) * std::exp(-q(4) * x) * std::cos(kTwoPi * q(2) * x + q(3));
  };
  Eigen::VectorXd init(5);
  init << mean, 2.0 * std::abs(s) / static_cast<double>(t.size()), best_f, std::arg(s), 0.0;
  const FitResult r = least_squares(model, t, y, init);
  CosineFit out;
  out.offset = r.params(0);
  out.amplitude = std::abs(r.params(1));
  out.frequency = std::abs(r.params(2));
  out.phase = r.params(3);
  out.tau = r.params(4) > 0 ? 1.0 / r.params(4) : INFINITY;
  out.sigma_frequency = std::sqrt(std::max(0.0, r.covariance(2, 2)));
  if (out.amplitude < min_amplitude) throw FitError("fit_damped_cosine: fitted amplitude vanishes");
  return out;
}

// ---------------------------------------------------------------------------
// Beta mixture

inline double beta_log_pdf(double h, double a, double b) {
  return (a - 1.0) * std::log(h) + (b - 1.0) * std::log1p(-h) - (std::lgamma(a) + std::lgamma(b) - std::lgamma(a + b));
}

/// Beta density; outside (0, 1) returns 0 and sets *boundary.
inline double beta_pdf(double h, double a, double b, bool* boundary = nullptr) {
  if (!(a > 0.0) || !(b > 0.0)) throw DomainError("beta_pdf: shape parameters must be positive");
  const bool out = !(h > 0.0 && h < 1.0);
  if (boundary) *boundary = out;
  return out ? 0.0 : std::exp(beta_log_pdf(h, a, b));
}

struct BetaComponent {
  double alpha = 1.0, beta = 1.0, weight = 0.5;
};

struct MixtureFit {
  std::array<BetaComponent, 2> components;  // [0] = zero/noise, [1] = peak/signal
  std::vector<double> log_likelihood;       // after each iteration
  int iterations = 0;
  bool converged = false;

  /// Posterior probability that population h belongs to the zero component.
  double posterior_zero(double h) const {
    h = std::clamp(h, 1e-6, 1.0 - 1e-6);
    const double l0 = std::log(components[0].weight) + beta_log_pdf(h, components[0].alpha, components[0].beta);
    const double l1 = std::log(components[1].weight) + beta_log_pdf(h, components[1].alpha, components[1].beta);
    return 1.0 / (1.0 + std::exp(l1 - l0));
  }
};

inline std::array<BetaComponent, 2> default_mixture_init() {
  return {BetaComponent{1.5, 15.0, 0.75}, BetaComponent{2.0, 2.0, 0.25}};
}

namespace detail {

inline double weighted_beta_q(const std::vector<double>& h, const std::vector<double>& r, double a, double b) {
  double q = 0.0;
  for (size_t i = 0; i < h.size(); ++i) q += r[i] * beta_log_pdf(h[i], a, b);
  return q;
}

constexpr double kShapeMin = 1e-2, kShapeMax = 1e5;

/// Newton ascent on the weighted beta log-likelihood, with step halving.
inline std::pair<double, double> beta_newton(const std::vector<double>& h, const std::vector<double>& r, double a, double b) {
  double sr = 0.0, s1 = 0.0, s2 = 0.0;
  for (size_t i = 0; i < h.size(); ++i) {
    sr += r[i];
    s1 += r[i] * std::log(h[i]);
    s2 += r[i] * std::log1p(-h[i]);
  }
  for (int it = 0; it < 50; ++it) {
    using boost::math::digamma;
    using boost::math::trigamma;
    const double ga = s1 - sr * (digamma(a) - digamma(a + b));
    const double gb = s2 - sr * (digamma(b) - digamma(a + b));
    const double tab = trigamma(a + b);
    Eigen::Matrix2d hess;
    hess << -sr * (trigamma(a) - tab), sr * tab, sr * tab, -sr * (trigamma(b) - tab);
    Eigen::Vector2d step = -hess.ldlt().solve(Eigen::Vector2d(ga, gb));
    if (!step.allFinite()) break;
    const double q0 = weighted_beta_q(h, r, a, b);
    double scale = 1.0;
    bool moved = false;
    for (int k = 0; k < 30; ++k, scale *= 0.5) {
      const double na = std::clamp(a + scale * step(0), kShapeMin, kShapeMax);
      const double nb = std::clamp(b + scale * step(1), kShapeMin, kShapeMax);
      if (weighted_beta_q(h, r, na, nb) > q0) {
        a = na;
        b = nb;
        moved = true;
        break;
      }
    }
    if (!moved || std::abs(ga) + std::abs(gb) < 1e-10) break;
  }
  return {a, b};
}

}  // namespace detail

/// Two-component beta-mixture EM. Weights are re-estimated exactly; shapes by
/// weighted method of moments, falling back to Newton ascent whenever the
/// moment estimate would lower the expected log-likelihood, so the data
/// log-likelihood never decreases.
inline MixtureFit em_fit(std::vector<double> h, std::array<BetaComponent, 2> init = default_mixture_init(),
                         double tol = 1e-8, int max_iter = 500) {
  if (h.size() < 4) throw DomainError("em_fit: at least 4 data points required");
  for (double& v : h) v = std::clamp(v, 1e-6, 1.0 - 1e-6);
  if (is_flat(h, 1e-12)) throw FitError("em_fit: degenerate data (all points identical)");
  const size_t n = h.size();
  MixtureFit fit;
  fit.components = init;
  auto log_likelihood = [&](const std::array<BetaComponent, 2>& c) {
    double ll = 0.0;
    for (double v : h) {
      const double l0 = std::log(c[0].weight) + beta_log_pdf(v, c[0].alpha, c[0].beta);
      const double l1 = std::log(c[1].weight) + beta_log_pdf(v, c[1].alpha, c[1].beta);
      const double m = std::max(l0, l1);
      ll += m + std::log(std::exp(l0 - m) + std::exp(l1 - m));
    }
    return ll;
  };
  double ll = log_likelihood(fit.components);
  std::array<std::vector<double>, 2> r{std::vector<double>(n), std::vector<double>(n)};
  for (int it = 0; it < max_iter; ++it) {
    for (size_t i = 0; i < n; ++i) {
      const double p0 = 1.0 / (1.0 + std::exp(std::log(fit.components[1].weight) +
                                              beta_log_pdf(h[i], fit.components[1].alpha, fit.components[1].beta) -
                                              std::log(fit.components[0].weight) -
                                              beta_log_pdf(h[i], fit.components[0].alpha, fit.components[0].beta)));
      r[0][i] = p0;
      r[1][i] = 1.0 - p0;
    }
    for (int k = 0; k < 2; ++k) {
      auto& c = fit.components[static_cast<size_t>(k)];
      const auto& rk = r[static_cast<size_t>(k)];
      const double sr = std::accumulate(rk.begin(), rk.end(), 0.0);
      c.weight = sr / static_cast<double>(n);
      if (c.weight < 1e-9) throw FitError("em_fit: degenerate fit, one component has zero weight");
      double m = 0.0, v = 0.0;
      for (size_t i = 0; i < n; ++i) m += rk[i] * h[i];
      m /= sr;
      for (size_t i = 0; i < n; ++i) v += rk[i] * (h[i] - m) * (h[i] - m);
      v /= sr;
      const double q_old = detail::weighted_beta_q(h, rk, c.alpha, c.beta);
      bool accepted = false;
      if (v > 0.0 && v < m * (1.0 - m)) {
        const double common = m * (1.0 - m) / v - 1.0;
        const double a = std::clamp(m * common, detail::kShapeMin, detail::kShapeMax);
        const double b = std::clamp((1.0 - m) * common, detail::kShapeMin, detail::kShapeMax);
        if (detail::weighted_beta_q(h, rk, a, b) >= q_old) {
          c.alpha = a;
          c.beta = b;
          accepted = true;
        }
      }
      if (!accepted) std::tie(c.alpha, c.beta) = detail::beta_newton(h, rk, c.alpha, c.beta);
    }
    const double next = log_likelihood(fit.components);
    if (next < ll - 1e-9 * std::max(1.0, std::abs(ll))) throw FitError("em_fit: log-likelihood decreased");
    fit.log_likelihood.push_back(next);
    fit.iterations = it + 1;
    const double change = next - ll;
    ll = next;
    if (std::abs(change) < tol) {
      fit.converged = true;
      break;
    }
  }
  return fit;
}

struct PeakClassification {
  std::vector<double> populations;
  std::vector<double> p_zero;
  std::vector<bool> peak;
  std::vector<int> peaks;
  int gcd = 0;
  int period = 0;
  MixtureFit mixture;
};

/// EM classification of populations over N = 2^n outcomes, then r = N / gcd(peaks).
inline PeakClassification classify_and_extract_period(const std::vector<double>& populations,
                                                      std::array<BetaComponent, 2> init = default_mixture_init()) {
  const int n = static_cast<int>(populations.size());
  if (n < 2 || (n & (n - 1)) != 0) throw DomainError("classify_and_extract_period: N must be a power of two");
  PeakClassification out;
  out.populations = populations;
  out.mixture = em_fit(populations, init);
  for (int y = 0; y < n; ++y) {
    const double p0 = out.mixture.posterior_zero(populations[static_cast<size_t>(y)]);
    out.p_zero.push_back(p0);
    out.peak.push_back(p0 <= 0.5);
    if (p0 <= 0.5) out.peaks.push_back(y);
  }
  if (out.peaks.empty()) throw FitError("classify_and_extract_period: no peaks detected");
  int s = 0;
  for (int y : out.peaks) s = std::gcd(s, y);
  out.gcd = s;
  out.period = s == 0 ? 1 : n / s;
  return out;
}

// ---------------------------------------------------------------------------
// Period finding theory

/// P(y) for a binary function f on 0..N-1 after the QFT of the f-traced state.
inline std::vector<double> qpf_theoretical_distribution(const std::vector<int>& f) {
  const size_t n = f.size();
  if (n == 0) throw DomainError("qpf_theoretical_distribution: empty truth table");
  std::vector<double> p(n, 0.0);
  for (size_t y = 0; y < n; ++y) {
    std::array<cplx, 2> sums{0.0, 0.0};
    for (size_t x = 0; x < n; ++x) {
      if (f[x] != 0 && f[x] != 1) throw DomainError("qpf_theoretical_distribution: f must be binary");
      sums[static_cast<size_t>(f[x])] += std::exp(kI * (kTwoPi * static_cast<double>(x * y) / static_cast<double>(n)));
    }
    p[y] = (std::norm(sums[0]) + std::norm(sums[1])) / static_cast<double>(n * n);
  }
  return p;
}

inline bool is_periodic(const std::vector<int>& f, int r) {
  for (size_t x = 0; x + static_cast<size_t>(r) < f.size(); ++x)
    if (f[x] != f[x + static_cast<size_t>(r)]) return false;
  return true;
}

}  // namespace mrqc
