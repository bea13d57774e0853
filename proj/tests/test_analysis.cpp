#include <gtest/gtest.h>

#include <random>

#include "mrqc/analysis.hpp"
#include "mrqc/compiler.hpp"

using namespace mrqc;

TEST(BetaPdf, KnownValues) {
  EXPECT_NEAR(beta_pdf(0.3, 1, 1), 1.0, 1e-14);
  EXPECT_NEAR(beta_pdf(0.5, 2, 2), 1.5, 1e-14);
  // Mode of beta(2, 5) at 0.2.
  EXPECT_GT(beta_pdf(0.2, 2, 5), beta_pdf(0.199, 2, 5));
  EXPECT_GT(beta_pdf(0.2, 2, 5), beta_pdf(0.201, 2, 5));
  bool boundary = false;
  EXPECT_EQ(beta_pdf(1.2, 2, 2, &boundary), 0.0);
  EXPECT_TRUE(boundary);
  EXPECT_THROW(beta_pdf(0.5, 0.0, 1.0), DomainError);
}

TEST(ExpFit, RecoversExactParameters) {
  std::vector<double> x, y;
  for (int n = 0; n < 20; ++n) {
    x.push_back(n);
    y.push_back(0.5 * std::pow(0.9, n) + 0.5);
  }
  const auto f = exp_fit(x, y);
  EXPECT_NEAR(f.A, 0.5, 1e-8);
  EXPECT_NEAR(f.p, 0.9, 1e-8);
  EXPECT_NEAR(f.c, 0.5, 1e-8);
  EXPECT_THROW(exp_fit(x, std::vector<double>(20, 0.3)), FitError);
  EXPECT_THROW(exp_fit({0, 1, 2}, {1, 0.5, 0.2}), FitError);
}

TEST(ExpFit, NoisyDataAcrossSeeds) {
  int within = 0;
  for (int seed = 0; seed < 100; ++seed) {
    std::mt19937_64 rng(static_cast<uint64_t>(seed));
    std::normal_distribution<double> noise(0.0, 0.01);
    std::vector<double> x, y;
    for (int n : {1, 2, 3, 5, 7, 10, 15, 20, 30, 40}) {
      x.push_back(n);
      y.push_back(0.5 * std::pow(0.95, n) + 0.5 + noise(rng));
    }
    if (std::abs(exp_fit(x, y).p - 0.95) < 0.01) ++within;
  }
  EXPECT_GE(within, 95);
}

TEST(HarmonicFit, LocatesExtrema) {
  std::vector<double> x, y;
  for (int k = 0; k < 16; ++k) {
    x.push_back(kTwoPi * k / 16);
    y.push_back(0.4 + 0.3 * std::cos(x.back() - 1.1));
  }
  const auto f = fit_first_harmonic(x, y);
  EXPECT_NEAR(f.argmax(), 1.1, 1e-12);
  EXPECT_NEAR(f.argmin(), 1.1 + kPi, 1e-12);
  EXPECT_NEAR(f.amplitude(), 0.3, 1e-12);
}

TEST(DampedCosine, FrequencyAndFlatSignal) {
  std::vector<double> t, y;
  for (int i = 0; i < 400; ++i) {
    t.push_back(i * 2e-9);
    y.push_back(0.5 + 0.5 * std::cos(kTwoPi * 7e6 * t.back() + 0.3));
  }
  EXPECT_NEAR(fit_damped_cosine(t, y).frequency, 7e6, 1e3);
  EXPECT_THROW(fit_damped_cosine(t, std::vector<double>(400, 0.5)), FitError);
}

TEST(EmFit, ClassifiesSyntheticMixture) {
  std::mt19937_64 rng(42);
  auto draw = [&](double a, double b) {
    std::gamma_distribution<double> ga(a, 1.0), gb(b, 1.0);
    const double x = ga(rng), z = gb(rng);
    return x / (x + z);
  };
  std::vector<double> h;
  for (int i = 0; i < 5; ++i) h.push_back(draw(1.5, 15));
  for (int i = 0; i < 3; ++i) h.push_back(draw(3, 3));
  const auto fit = em_fit(h);
  for (int i = 0; i < 8; ++i) EXPECT_EQ(fit.posterior_zero(h[static_cast<size_t>(i)]) > 0.5, i < 5) << "point " << i;
  for (size_t k = 1; k < fit.log_likelihood.size(); ++k)
    EXPECT_GE(fit.log_likelihood[k], fit.log_likelihood[k - 1] - 1e-12);
}

TEST(EmFit, LikelihoodMonotoneOnRandomData) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> h(8);
    for (auto& v : h) v = std::pow(u(rng), 3.0);
    const auto fit = em_fit(h);
    for (size_t k = 1; k < fit.log_likelihood.size(); ++k)
      EXPECT_GE(fit.log_likelihood[k], fit.log_likelihood[k - 1] - 1e-9 * std::abs(fit.log_likelihood[k - 1]));
  }
}

TEST(EmFit, DegenerateInputs) {
  EXPECT_THROW(em_fit(std::vector<double>(8, 0.2)), FitError);
  EXPECT_THROW(em_fit({0.1, 0.2, 0.3}), DomainError);
}

TEST(QpfTheory, DistributionsForTableFunctions) {
  const std::map<int, std::vector<double>> expected{{1, {1, 0, 0, 0, 0, 0, 0, 0}},
                                                    {2, {0.5, 0, 0, 0, 0.5, 0, 0, 0}},
                                                    {4, {0.5, 0, 0.25, 0, 0, 0, 0.25, 0}}};
  for (const auto& [r, p] : expected) {
    const auto f = qpf_truth_table(r);
    EXPECT_TRUE(is_periodic(f, r));
    const auto d = qpf_theoretical_distribution(f);
    double total = 0.0;
    for (int y = 0; y < 8; ++y) {
      EXPECT_NEAR(d[static_cast<size_t>(y)], p[static_cast<size_t>(y)], 1e-12);
      total += d[static_cast<size_t>(y)];
      if (y % (8 / r) != 0) EXPECT_NEAR(d[static_cast<size_t>(y)], 0.0, 1e-12);
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<int> f(8);
    for (auto& v : f) v = static_cast<int>(rng() & 1);
    const auto d = qpf_theoretical_distribution(f);
    EXPECT_NEAR(std::accumulate(d.begin(), d.end(), 0.0), 1.0, 1e-12);
  }
}

TEST(PeriodExtraction, GcdConventionAndNoiselessRecovery) {
  for (int r : {1, 2, 4}) {
    const auto c = classify_and_extract_period(qpf_theoretical_distribution(qpf_truth_table(r)));
    EXPECT_EQ(c.period, r);
  }
  const auto c2 = classify_and_extract_period({0.47, 0.01, 0.02, 0.005, 0.44, 0.02, 0.01, 0.025});
  EXPECT_EQ(c2.peaks, (std::vector<int>{0, 4}));
  EXPECT_EQ(c2.period, 2);
  const auto c4 = classify_and_extract_period({0.45, 0.02, 0.22, 0.01, 0.03, 0.01, 0.24, 0.02});
  EXPECT_EQ(c4.peaks, (std::vector<int>{0, 2, 6}));
  EXPECT_EQ(c4.period, 4);
}
