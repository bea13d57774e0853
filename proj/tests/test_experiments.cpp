#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "mrqc/experiments.hpp"

using namespace mrqc;

namespace {

ExperimentConfig ideal(const std::string& experiment) {
  ExperimentConfig c;
  c.experiment = experiment;
  c.decoherence = DecoherenceMode::none;
  c.spam = SpamMode::none;
  return c;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Config, ModeNamesRoundTrip) {
  for (auto m : {DecoherenceMode::none, DecoherenceMode::full, DecoherenceMode::infinite_phonon,
                 DecoherenceMode::infinite_qubit})
    EXPECT_EQ(parse_decoherence(decoherence_name(m)), m);
  for (auto m : {SpamMode::none, SpamMode::prep, SpamMode::measure, SpamMode::full}) EXPECT_EQ(parse_spam(spam_name(m)), m);
  EXPECT_THROW(parse_decoherence("partial"), std::invalid_argument);
  EXPECT_THROW(parse_spam("readout"), std::invalid_argument);
  EXPECT_FALSE(coherence_flags(DecoherenceMode::infinite_phonon).phonons);
  EXPECT_TRUE(coherence_flags(DecoherenceMode::infinite_phonon).transmon);
  EXPECT_TRUE(spam_flags(SpamMode::prep).ideal_measure);
  EXPECT_FALSE(spam_flags(SpamMode::prep).ideal_prep);
}

TEST(Config, CompileOptionsFollowModes) {
  ExperimentConfig c;
  EXPECT_FALSE(compile_options(c).virtual_z);
  EXPECT_DOUBLE_EQ(compile_options(c).measure_idle, 7e-6);
  c.spam = SpamMode::prep;
  EXPECT_DOUBLE_EQ(compile_options(c).measure_idle, 0.0);
  c.decoherence = DecoherenceMode::none;
  EXPECT_TRUE(compile_options(c).virtual_z);
}

TEST(Hash, MatchesGitBlobIds) {
  EXPECT_EQ(git_blob_sha1(""), "e69de29bb2d1d6434b8b29ae775ad8c2e48c5391");
  EXPECT_EQ(git_blob_sha1("hello\n"), "ce013625030ba8dba906f756967f9e9ca394464a");
}

TEST(Run, UnknownExperimentThrows) {
  ExperimentConfig c;
  c.experiment = "grover";
  EXPECT_THROW(run(c), std::invalid_argument);
}

TEST(Run, MissingDeviceFileThrows) {
  ExperimentConfig c = ideal("rb");
  c.device_path = "/nonexistent/device.json";
  EXPECT_ANY_THROW(run(c));
}

TEST(Rb, IdealRunNeverDecays) {
  ExperimentConfig c = ideal("rb");
  c.rb_seeds = 4;
  const ResultBundle b = run(c);
  EXPECT_NEAR(b.summary["fidelity"].get<double>(), 1.0, 1e-12);
  EXPECT_NEAR(b.summary["transmon_fidelity"].get<double>(), 1.0, 1e-12);
  EXPECT_NEAR(b.summary["swap_infidelity"].get<double>(), 0.0, 1e-12);
  ASSERT_TRUE(b.files.count("survival.csv"));
  ASSERT_TRUE(b.files.count("fit.json"));
  EXPECT_EQ(b.files.at("survival.csv").substr(0, 26), "target,length,mean,stderr\n");
}

TEST(Rb, SameConfigGivesByteIdenticalBundles) {
  ExperimentConfig c;
  c.experiment = "rb";
  c.rb_seeds = 3;
  c.rb_lengths = {1, 2, 4, 8};
  const auto dir = std::filesystem::temp_directory_path() / "mrqc_test_bundles";
  std::filesystem::remove_all(dir);
  emit(run(c), dir / "a");
  emit(run(c), dir / "b");
  for (const char* f : {"config.json", "summary.json", "survival.csv", "fit.json"}) {
    const std::string a = slurp(dir / "a" / f);
    EXPECT_FALSE(a.empty()) << f;
    EXPECT_EQ(a, slurp(dir / "b" / f)) << f;
  }
  c.seed = 2;
  EXPECT_NE(run(c).files.at("survival.csv"), slurp(dir / "a" / "survival.csv"));
  std::filesystem::remove_all(dir);
}

TEST(Bundle, ConfigRecordsDeviceHashAndSchema) {
  ExperimentConfig c = ideal("rb");
  c.rb_seeds = 2;
  const ResultBundle b = run(c);
  EXPECT_EQ(b.config["device_sha1"].get<std::string>().size(), 40u);
  EXPECT_EQ(b.config["schema_version"].get<int>(), kSchemaVersion);
  EXPECT_EQ(b.config["shots"].get<std::string>(), "exact");
  EXPECT_EQ(b.summary["experiment"].get<std::string>(), "rb");
}

TEST(CphiTomo, IdealGateScoresOne) {
  ExperimentConfig c = ideal("cphi-tomo");
  c.phi = kPi / 2;
  const ResultBundle b = run(c);
  EXPECT_NEAR(b.summary["fidelity"].get<double>(), 1.0, 1e-9);
  const auto chi = nlohmann::json::parse(b.files.at("chi.json"));
  EXPECT_EQ(chi["labels"].size(), 16u);
}

TEST(QftTomo, IdealChiHas64Labels) {
  const ResultBundle b = run(ideal("qft-tomo"));
  EXPECT_NEAR(b.summary["fidelity"].get<double>(), 1.0, 1e-8);
  const auto chi = nlohmann::json::parse(b.files.at("chi.json"));
  ASSERT_EQ(chi["labels"].size(), 64u);
  EXPECT_EQ(chi["indices"].back().get<int>(), 63);
  EXPECT_EQ(chi["real"].size(), 64u);
}

TEST(Qpf, IdealPeriodTwoDistribution) {
  ExperimentConfig c = ideal("qpf");
  c.period = 2;
  const ResultBundle b = run(c);
  const auto p = b.summary["distribution"].get<std::vector<double>>();
  const std::vector<double> expected{0.5, 0, 0, 0, 0.5, 0, 0, 0};
  for (size_t y = 0; y < 8; ++y) EXPECT_NEAR(p[y], expected[y], 1e-9) << y;
  EXPECT_EQ(b.summary["recovered_period"].get<int>(), 2);
}

TEST(Qpf, ShotRunsAreSeeded) {
  ExperimentConfig c;
  c.experiment = "qpf";
  c.period = 4;
  c.shots = 1000;
  c.runs = 5;
  const ResultBundle a = run(c), b = run(c);
  EXPECT_EQ(a.files.at("records.csv"), b.files.at("records.csv"));
  EXPECT_EQ(a.summary["successes"].get<int>(), 5);
}
