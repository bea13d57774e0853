// Command-line runner: `mrqc run <experiment> [options]`.

#include <CLI11.hpp>

#include <iostream>

#include "mrqc/experiments.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Simulated experiments on a transmon coupled to phonon-mode memories"};
  app.require_subcommand(1);
  auto* run = app.add_subcommand("run", "Run a named experiment and write its result bundle");

  mrqc::ExperimentConfig cfg;
  std::string decoherence = "full", spam = "full", shots = "exact";
  run->add_option("experiment", cfg.experiment, "rb | cphi-tomo | cphi-repeat | qft-tomo | qpf | calibrate")
      ->required()
      ->check(CLI::IsMember(mrqc::experiment_names()));
  run->add_option("--device", cfg.device_path, "Device JSON file (default: bundled parameters)");
  run->add_option("--seed", cfg.seed, "RNG seed");
  run->add_option("--decoherence", decoherence, "none | full | infinite-phonon | infinite-qubit")->capture_default_str();
  run->add_option("--spam", spam, "none | prep | measure | full")->capture_default_str();
  run->add_option("--shots", shots, "Shots per setting, or 'exact'")->capture_default_str();
  run->add_option("--out", cfg.out, "Output directory")->capture_default_str();
  run->add_option("--phi", cfg.phi, "Controlled phase for cphi-tomo, cphi-repeat and calibrate (rad)");
  run->add_option("--period", cfg.period, "Oracle period for qpf (1, 2 or 4)");
  run->add_option("--mode", cfg.mode, "Phonon mode index; -1 runs rb on the transmon only");
  run->add_option("--repetitions", cfg.repetitions, "Largest repetition count + 1 for cphi-repeat");
  run->add_option("--runs", cfg.runs, "Shot-sampled repetitions for qpf");
  run->add_option("--rb-seeds", cfg.rb_seeds, "Random sequences per RB length");
  run->add_option("--pulse", cfg.pulse_duration, "Single-qubit pulse duration (s)");
  run->add_option("--measure-idle", cfg.measure_idle, "Idle after each non-ideal measurement (s)");

  CLI11_PARSE(app, argc, argv);
  try {
    cfg.decoherence = mrqc::parse_decoherence(decoherence);
    cfg.spam = mrqc::parse_spam(spam);
    cfg.shots = shots == "exact" ? 0 : std::stoi(shots);
    if (cfg.shots < 0) throw std::invalid_argument("shots must be positive or 'exact'");
    const auto bundle = mrqc::run(cfg);
    mrqc::emit(bundle, cfg.out);
    std::cout << bundle.summary.dump(2) << "\n";
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
