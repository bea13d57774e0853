#include <gtest/gtest.h>

#include <random>

#include "mrqc/gates.hpp"
#include "mrqc/tomography.hpp"

using namespace mrqc;

namespace {

CMatrix random_density(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  CMatrix a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = cplx(n(rng), n(rng));
  CMatrix rho = a * a.adjoint();
  return rho / rho.trace();
}

CMatrix random_unitary(int d, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  CMatrix a(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) a(i, j) = cplx(n(rng), n(rng));
  Eigen::HouseholderQR<CMatrix> qr(a);
  return qr.householderQ();
}

/// Random CPTP channel from a Stinespring unitary with a d-dimensional environment.
CMatrix random_channel(int d, std::mt19937_64& rng) {
  const CMatrix u = random_unitary(d * d, rng);
  std::vector<CMatrix> kraus;
  for (int k = 0; k < d; ++k) {
    CMatrix m(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) m(i, j) = u(i * d + k, j * d);
    kraus.push_back(m);
  }
  return superop_from_kraus(kraus).entries;
}

OutcomeTable single_qubit_table(std::vector<double> px, std::vector<double> py, std::vector<double> pz) {
  return {{{Axis::x}, px}, {{Axis::y}, py}, {{Axis::z}, pz}};
}

}  // namespace

TEST(StateTomography, SingleQubitExamples) {
  const CMatrix r0 = state_tomography(single_qubit_table({0.5, 0.5}, {0.5, 0.5}, {1, 0}), 1);
  EXPECT_NEAR(std::abs(r0(0, 0) - 1.0), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(r0(1, 1)), 0.0, 1e-15);
  const CMatrix rp = state_tomography(single_qubit_table({1, 0}, {0.5, 0.5}, {0.5, 0.5}), 1);
  EXPECT_LT((rp - 0.5 * CMatrix::Ones(2, 2)).cwiseAbs().maxCoeff(), 1e-15);
  OutcomeTable partial{{{Axis::z}, {1, 0}}};
  EXPECT_THROW(state_tomography(partial, 1), DomainError);
}

TEST(StateTomography, RoundTripOnRandomStates) {
  std::mt19937_64 rng(1);
  for (int n : {1, 2, 3}) {
    const CMatrix rho = random_density(1 << n, rng);
    EXPECT_LT((state_tomography(exact_outcome_table(rho, n), n) - rho).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(ProcessTomography, IdentityAndUnitaryChannels) {
  std::vector<CMatrix> in;
  for (const auto& l : all_input_labels(1)) in.push_back(input_density(l));
  EXPECT_LT((process_tomography(in, in).entries - CMatrix::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-10);
  std::vector<CMatrix> out;
  for (const auto& r : in) out.push_back(ops::pauli_x() * r * ops::pauli_x());
  EXPECT_LT((process_tomography(in, out).entries - kron(ops::pauli_x().conjugate(), ops::pauli_x())).cwiseAbs().maxCoeff(),
            1e-10);
  std::vector<CMatrix> dup(4, in[0]);
  EXPECT_THROW(process_tomography(dup, dup), DomainError);
}

TEST(ProcessTomography, RandomChannelMatchesDirectApplication) {
  std::mt19937_64 rng(2);
  const int d = 4;
  const CMatrix e = random_channel(d, rng);
  std::vector<CMatrix> in, out;
  for (const auto& l : all_input_labels(2)) {
    in.push_back(input_density(l));
    const CMatrix rho_out = devectorize(e * vectorize(in.back()));
    out.push_back(state_tomography(exact_outcome_table(rho_out, 2), 2));
  }
  const CMatrix rec = process_tomography(in, out).entries;
  for (int probe = 0; probe < 20; ++probe) {
    const CMatrix rho = random_density(d, rng);
    EXPECT_LT((rec * vectorize(rho) - e * vectorize(rho)).cwiseAbs().maxCoeff(), 1e-8);
  }
}

TEST(Chi, KnownChannelsAndRoundTrip) {
  const CMatrix id_chi = superop_to_chi(CMatrix::Identity(4, 4), 1);
  EXPECT_NEAR(std::abs(id_chi(0, 0) - 1.0), 0.0, 1e-14);
  EXPECT_NEAR(id_chi.cwiseAbs().sum(), 1.0, 1e-14);
  const CMatrix x_chi = superop_to_chi(superop_from_unitary(ops::pauli_x()).entries, 1);
  EXPECT_NEAR(std::abs(x_chi(1, 1)), 1.0, 1e-14);
  EXPECT_NEAR(x_chi.cwiseAbs().sum(), 1.0, 1e-14);
  std::mt19937_64 rng(3);
  for (int n : {1, 2, 3}) {
    const int nb = ipow(4, n);
    CMatrix chi(nb, nb);
    std::normal_distribution<double> g(0.0, 1.0);
    for (int i = 0; i < nb; ++i)
      for (int j = 0; j < nb; ++j) chi(i, j) = cplx(g(rng), g(rng));
    EXPECT_LT((superop_to_chi(chi_to_superop(chi, n), n) - chi).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Chi, HermitianUnitTraceForCptpChannels) {
  std::mt19937_64 rng(4);
  for (int n : {1, 2}) {
    const CMatrix chi = superop_to_chi(random_channel(1 << n, rng), n);
    EXPECT_LT((chi - chi.adjoint()).cwiseAbs().maxCoeff(), 1e-10);
    EXPECT_NEAR(std::abs(chi.trace() - 1.0), 0.0, 1e-10);
    const CMatrix u = superop_to_chi(superop_from_unitary(random_unitary(1 << n, rng)).entries, n);
    EXPECT_NEAR(std::abs(u.trace() - 1.0), 0.0, 1e-10);
  }
}

TEST(Fidelity, FormulaExamples) {
  std::mt19937_64 rng(5);
  const CMatrix u = random_unitary(4, rng);
  EXPECT_NEAR(average_gate_fidelity(superop_from_unitary(u).entries, u), 1.0, 1e-12);
  const CMatrix id = CMatrix::Identity(2, 2);
  EXPECT_NEAR(average_gate_fidelity(superop_from_unitary(ops::pauli_x()).entries, id), 1.0 / 3.0, 1e-14);
  std::vector<CMatrix> dep;
  for (int k = 0; k < 4; ++k) dep.push_back(0.5 * ops::pauli(k));
  EXPECT_NEAR(average_gate_fidelity(superop_from_kraus(dep).entries, id), 0.5, 1e-14);
  // The daggerless trace agrees for Hermitian (self-inverse) targets.
  EXPECT_NEAR(average_gate_fidelity(superop_from_unitary(ops::pauli_x()).entries, ops::pauli_x(), true), 1.0, 1e-14);
}

TEST(PhaseCompensation, RecoversPlantedPhase) {
  std::mt19937_64 rng(6);
  const CMatrix u = random_unitary(4, rng);
  const CMatrix planted = z_rotations({0.7, 0.0}) * u;
  const auto c = compensate_local_phases(superop_from_unitary(planted).entries, u, 2);
  EXPECT_NEAR(c.phases[0], 0.7, 1e-4);
  EXPECT_LT(std::abs(phase_distance(c.phases[1], 0.0)), 1e-4);
  EXPECT_GT(c.fidelity, 1.0 - 1e-6);
  const auto none = compensate_local_phases(superop_from_unitary(u).entries, u, 2);
  for (double p : none.phases) EXPECT_LT(std::abs(phase_distance(p, 0.0)), 1e-4);
  // Reported phases reproduce the reported maximum.
  EXPECT_NEAR(average_gate_fidelity(superop_from_unitary(planted).entries, z_rotations(c.phases) * u), c.fidelity, 1e-12);
}

TEST(PhaseCompensation, CphiByProductPhasesCompensate) {
  const double g = kTwoPi * 296e3;
  for (double phi : {kPi, kPi / 2, kPi / 4}) {
    const auto p = solve_cphi(phi, g);
    const CMatrix block = computational_block(cphi_sequence_unitary(p, g).entries, 3);
    CMatrix target = CMatrix::Identity(4, 4);
    target(3, 3) = std::exp(kI * phi);
    const auto c = compensate_local_phases(superop_from_unitary(block).entries, target, 2);
    EXPECT_GT(c.fidelity, 1.0 - 1e-9) << phi;
  }
}

TEST(Misassignment, InversionExamples) {
  const MisassignmentModel m{0.88, 0.85};
  const auto raw = apply_misassignment({1.0, 0.0}, m);
  EXPECT_NEAR(raw[0], 0.88, 1e-15);
  EXPECT_NEAR(raw[1], 0.12, 1e-15);
  const auto back = correct_misassignment(raw, m).p;
  EXPECT_NEAR(back[0], 1.0, 1e-12);
  EXPECT_NEAR(back[1], 0.0, 1e-12);
  const auto half = correct_misassignment({0.5, 0.5}, m).p;
  EXPECT_NEAR(half[0], 0.35 / 0.73, 1e-12);
  EXPECT_NEAR(half[1], 0.38 / 0.73, 1e-12);
  const auto id = correct_misassignment({0.3, 0.7}, MisassignmentModel{1.0, 1.0}).p;
  EXPECT_NEAR(id[0], 0.3, 1e-15);
  EXPECT_THROW(correct_misassignment({1.0, 0.0}, m), DomainError);
  EXPECT_THROW(MisassignmentModel({0.4, 0.9}).validate(), DomainError);
}

TEST(Misassignment, JointRoundTrip) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const MisassignmentModel m{0.88, 0.85};
  std::vector<double> p(8);
  double total = 0.0;
  for (auto& v : p) total += (v = u(rng));
  for (auto& v : p) v /= total;
  const auto back = correct_misassignment(apply_misassignment(p, m), m).p;
  for (int i = 0; i < 8; ++i) EXPECT_NEAR(back[static_cast<size_t>(i)], p[static_cast<size_t>(i)], 1e-12);
}

TEST(RepetitionFit, RecoversPlantedDecay) {
  std::mt19937_64 rng(9);
  std::normal_distribution<double> noise(0.0, 0.005);
  std::vector<double> n, f;
  for (int k = 0; k < 20; ++k) {
    n.push_back(k);
    f.push_back(0.8 * std::pow(0.892, k) + 0.1 + noise(rng));
  }
  EXPECT_NEAR(repeated_gate_fidelity(f, n).fidelity, 0.892, 0.01);
  EXPECT_DOUBLE_EQ(repeated_gate_fidelity(std::vector<double>(20, 0.9), n).fidelity, 1.0);
  EXPECT_THROW(repeated_gate_fidelity({1, 0.9, 0.8}, {0, 1, 2}), FitError);
}

TEST(Sampling, FrequenciesAreDeterministicPerSeed) {
  std::mt19937_64 a(11), b(11);
  const std::vector<double> p{0.1, 0.2, 0.3, 0.4};
  EXPECT_EQ(sample_frequencies(p, 1000, a), sample_frequencies(p, 1000, b));
}
