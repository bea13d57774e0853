#pragma once
// Named experiments over the simulated device and their on-disk result bundles.

#include <openssl/evp.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "mrqc/analysis.hpp"
#include "mrqc/benchmarking.hpp"
#include "mrqc/calibration.hpp"
#include "mrqc/compiler.hpp"
#include "mrqc/execution.hpp"
#include "mrqc/tomography.hpp"

namespace mrqc {

inline constexpr int kSchemaVersion = 1;

enum class DecoherenceMode { none, full, infinite_phonon, infinite_qubit };
enum class SpamMode { none, prep, measure, full };

inline const char* decoherence_name(DecoherenceMode m) {
  switch (m) {
    case DecoherenceMode::none: return "none";
    case DecoherenceMode::full: return "full";
    case DecoherenceMode::infinite_phonon: return "infinite-phonon";
    case DecoherenceMode::infinite_qubit: return "infinite-qubit";
  }
  return "?";
}

inline const char* spam_name(SpamMode m) {
  switch (m) {
    case SpamMode::none: return "none";
    case SpamMode::prep: return "prep";
    case SpamMode::measure: return "measure";
    case SpamMode::full: return "full";
  }
  return "?";
}

inline DecoherenceMode parse_decoherence(const std::string& s) {
  for (auto m : {DecoherenceMode::none, DecoherenceMode::full, DecoherenceMode::infinite_phonon,
                 DecoherenceMode::infinite_qubit})
    if (s == decoherence_name(m)) return m;
  throw std::invalid_argument("unknown decoherence mode '" + s + "'");
}

inline SpamMode parse_spam(const std::string& s) {
  for (auto m : {SpamMode::none, SpamMode::prep, SpamMode::measure, SpamMode::full})
    if (s == spam_name(m)) return m;
  throw std::invalid_argument("unknown SPAM mode '" + s + "'");
}

/// Infinite coherence drops that subsystem's collapse operators.
inline CoherenceFlags coherence_flags(DecoherenceMode m) {
  switch (m) {
    case DecoherenceMode::none: return CoherenceFlags::none();
    case DecoherenceMode::full: return CoherenceFlags::full();
    case DecoherenceMode::infinite_phonon: return {true, false};
    case DecoherenceMode::infinite_qubit: return {false, true};
  }
  return CoherenceFlags::full();
}

struct SpamFlags {
  bool ideal_prep = false;
  bool ideal_measure = false;
};

/// "prep" and "measure" name the error that is simulated; the other side is ideal.
inline SpamFlags spam_flags(SpamMode m) {
  switch (m) {
    case SpamMode::none: return {true, true};
    case SpamMode::prep: return {false, true};
    case SpamMode::measure: return {true, false};
    case SpamMode::full: return {false, false};
  }
  return {};
}

inline const std::vector<std::string>& experiment_names() {
  static const std::vector<std::string> n{"rb", "cphi-tomo", "cphi-repeat", "qft-tomo", "qpf", "calibrate"};
  return n;
}

struct ExperimentConfig {
  std::string experiment = "rb";
  std::string device_path;  // empty: the bundled default device
  std::uint64_t seed = 1;
  DecoherenceMode decoherence = DecoherenceMode::full;
  SpamMode spam = SpamMode::full;
  int shots = 0;  // 0: exact populations
  std::string out = "out";

  double phi = kPi;
  int period = 2;
  int mode = 0;  // phonon mode under test; -1 selects the transmon alone for rb
  int repetitions = 20;
  int runs = 1;
  int rb_seeds = 30;
  std::vector<int> rb_lengths{1, 2, 3, 5, 7, 10, 15, 20, 30, 40};
  double pulse_duration = 50e-9;
  double measure_idle = 7e-6;
  double f_g = 0.88, f_e = 0.85;
  int sweep_points = 16;
};

inline nlohmann::json to_json(const ExperimentConfig& c) {
  return {{"experiment", c.experiment},
          {"device", c.device_path.empty() ? std::string("default") : c.device_path},
          {"seed", c.seed},
          {"decoherence", decoherence_name(c.decoherence)},
          {"spam", spam_name(c.spam)},
          {"shots", c.shots == 0 ? nlohmann::json("exact") : nlohmann::json(c.shots)},
          {"phi", c.phi},
          {"period", c.period},
          {"mode", c.mode},
          {"repetitions", c.repetitions},
          {"runs", c.runs},
          {"rb_seeds", c.rb_seeds},
          {"rb_lengths", c.rb_lengths},
          {"pulse_duration_s", c.pulse_duration},
          {"measure_idle_s", c.measure_idle},
          {"misassignment", {{"f_g", c.f_g}, {"f_e", c.f_e}}},
          {"sweep_points", c.sweep_points}};
}

inline CompileOptions compile_options(const ExperimentConfig& c) {
  CompileOptions o;
  o.pulse_duration = c.pulse_duration;
  o.virtual_z = c.decoherence == DecoherenceMode::none;
  o.ideal_measure = spam_flags(c.spam).ideal_measure;
  o.measure_idle = o.ideal_measure ? 0.0 : c.measure_idle;
  return o;
}

// ---------------------------------------------------------------------------
// Content hash

/// SHA-1 of "blob <size>\0<content>", as git computes object ids.
inline std::string git_blob_sha1(const std::string& content) {
  const std::string obj = "blob " + std::to_string(content.size()) + std::string(1, '\0') + content;
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(obj.data(), obj.size(), md, &len, EVP_sha1(), nullptr) != 1) throw std::runtime_error("SHA-1 failed");
  static const char* hex = "0123456789abcdef";
  std::string s;
  for (unsigned int i = 0; i < len; ++i) {
    s += hex[md[i] >> 4];
    s += hex[md[i] & 15];
  }
  return s;
}

// ---------------------------------------------------------------------------
// Circuit tomography on the executor

struct TomographyOptions {
  CompileOptions compile;
  bool ideal_prep = false;
  int shots = 0;
  std::uint64_t seed = 1;
};

struct CircuitTomography {
  std::vector<std::vector<PrepLabel>> inputs;
  std::vector<CMatrix> input_states;
  std::vector<CMatrix> output_states;
  SuperOperator process;
  CompiledSchedule core_schedule;
};

namespace detail {

inline LogicalCircuit with_preparations(const LogicalCircuit& core, const std::vector<PrepLabel>& labels) {
  LogicalCircuit c(core.n_qubits);
  c.home = core.home;
  // Phonon-homed qubits first: they borrow the transmon while it is still idle.
  for (int q = 0; q < core.n_qubits; ++q)
    if (core.home[static_cast<size_t>(q)] != kTransmon) c.prepare(q, labels[static_cast<size_t>(q)]);
  for (int q = 0; q < core.n_qubits; ++q)
    if (core.home[static_cast<size_t>(q)] == kTransmon) c.prepare(q, labels[static_cast<size_t>(q)]);
  for (const auto& g : core.gates) c.gates.push_back(g);
  return c;
}

/// Outcome probabilities re-indexed by qubit, qubit 0 most significant.
inline std::vector<double> qubit_ordered_distribution(const SimState& s, const CompiledSchedule& sch, int n) {
  std::vector<double> p(static_cast<size_t>(1) << n, 0.0);
  for (const auto& [bits, prob] : outcome_probabilities(s)) {
    size_t idx = 0;
    for (size_t k = 0; k < bits.size(); ++k)
      if (bits[k]) idx |= static_cast<size_t>(1) << (n - 1 - sch.measurements[k].qubit);
    p[idx] += prob;
  }
  return p;
}

}  // namespace detail

/// Process tomography of a coherent circuit: 4^n input states, 3^n
/// measurement settings, each executed as a full compiled schedule.
inline CircuitTomography simulate_process_tomography(const Executor& ex, const LogicalCircuit& core,
                                                     const TomographyOptions& opt) {
  const int n = core.n_qubits;
  CircuitTomography out;
  CompileOptions probe = opt.compile;
  probe.return_home = false;
  out.core_schedule = compile(core, ex.device(), probe);
  // The qubit left in the transmon is read first, without a swap.
  std::vector<int> order;
  if (out.core_schedule.final_resident >= 0) order.push_back(out.core_schedule.final_resident);
  for (int q = 0; q < n; ++q)
    if (q != out.core_schedule.final_resident) order.push_back(q);

  std::mt19937_64 rng(opt.seed);
  const auto settings = all_axis_settings(n);
  for (const auto& labels : all_input_labels(n)) {
    const LogicalCircuit body = opt.ideal_prep ? core : detail::with_preparations(core, labels);
    const CompiledSchedule prefix = compile(body, ex.device(), probe);
    SimState start = opt.ideal_prep ? prepared_state(ex, core.home, prefix.initial_modes, labels)
                                    : ex.ground_state(prefix.initial_modes);
    ex.run(start, prefix.segments);

    OutcomeTable table;
    for (const auto& axes : settings) {
      LogicalCircuit c = body;
      for (int q : order) c.measure(q, axes[static_cast<size_t>(q)]);
      const CompiledSchedule s = compile(c, ex.device(), opt.compile);
      SimState st = start;
      for (size_t k = prefix.segments.size(); k < s.segments.size(); ++k) ex.apply(st, s.segments[k]);
      std::vector<double> p = detail::qubit_ordered_distribution(st, s, n);
      if (opt.shots > 0) p = sample_frequencies(p, opt.shots, rng);
      table[axes] = p;
    }
    out.inputs.push_back(labels);
    out.input_states.push_back(input_density(labels));
    out.output_states.push_back(state_tomography(table, n));
  }
  out.process = process_tomography(out.input_states, out.output_states);
  return out;
}

// ---------------------------------------------------------------------------
// Result bundles

struct ResultBundle {
  nlohmann::json config;
  nlohmann::json summary;
  std::map<std::string, std::string> files;  // name -> content
};

inline std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline std::string csv_row(const std::vector<std::string>& cells) {
  std::string s;
  for (size_t i = 0; i < cells.size(); ++i) s += (i ? "," : "") + cells[i];
  return s + "\n";
}

inline nlohmann::json matrix_json(const CMatrix& m) {
  nlohmann::json re = nlohmann::json::array(), im = nlohmann::json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::vector<double> r, c;
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      r.push_back(m(i, j).real());
      c.push_back(m(i, j).imag());
    }
    re.push_back(r);
    im.push_back(c);
  }
  return {{"real", re}, {"imag", im}};
}

inline nlohmann::json chi_json(const CMatrix& chi, int n) {
  std::vector<std::string> labels;
  std::vector<int> indices;
  for (int k = 0; k < ipow(4, n); ++k) {
    labels.push_back(pauli_label(k, n));
    indices.push_back(k);
  }
  nlohmann::json j = matrix_json(chi);
  j["labels"] = labels;
  j["indices"] = indices;
  return j;
}

inline void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << content;
  if (!f) throw std::runtime_error("write failed for " + path.string());
}

/// Writes config.json, summary.json and every table of the bundle into `dir`.
inline void emit(const ResultBundle& b, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create " + dir.string() + ": " + ec.message());
  write_file(dir / "config.json", b.config.dump(2) + "\n");
  write_file(dir / "summary.json", b.summary.dump(2) + "\n");
  for (const auto& [name, content] : b.files) write_file(dir / name, content);
}

// ---------------------------------------------------------------------------
// Experiments

struct ExperimentContext {
  ExperimentConfig config;
  DeviceParams device;
  std::string device_hash;
  Executor executor;

  explicit ExperimentContext(const ExperimentConfig& c) : ExperimentContext(c, load(c)) {}

 private:
  struct Loaded {
    DeviceParams device;
    std::string hash;
  };
  static Loaded load(const ExperimentConfig& c) {
#ifdef MRQC_DEFAULT_DEVICE
    const std::string path = c.device_path.empty() ? std::string(MRQC_DEFAULT_DEVICE) : c.device_path;
#else
    if (c.device_path.empty()) throw CalibrationError("no device file given");
    const std::string path = c.device_path;
#endif
    const std::string text = read_text_file(path);
    return {parse_device(text), git_blob_sha1(text)};
  }
  ExperimentContext(const ExperimentConfig& c, Loaded l)
      : config(c), device(std::move(l.device)), device_hash(std::move(l.hash)),
        executor(device, {coherence_flags(c.decoherence)}) {}
};

inline ResultBundle new_bundle(const ExperimentContext& ctx) {
  ResultBundle b;
  b.config = to_json(ctx.config);
  b.config["device_sha1"] = ctx.device_hash;
  b.config["schema_version"] = kSchemaVersion;
  b.summary["experiment"] = ctx.config.experiment;
  b.summary["schema_version"] = kSchemaVersion;
  return b;
}

inline ResultBundle run_rb_experiment(const ExperimentContext& ctx) {
  const auto& c = ctx.config;
  RBOptions o;
  o.lengths = c.rb_lengths;
  o.seeds = c.rb_seeds;
  o.rng_seed = c.seed;
  o.pulse_duration = c.pulse_duration;
  ResultBundle b = new_bundle(ctx);
  std::string csv = csv_row({"target", "length", "mean", "stderr"});
  nlohmann::json fits;
  auto run_target = [&](int target, const std::string& name) {
    const RBCurve curve = run_rb(ctx.executor, {target}, o);
    for (size_t k = 0; k < curve.lengths.size(); ++k)
      csv += csv_row({name, std::to_string(curve.lengths[k]), format_number(curve.mean[k]), format_number(curve.stderr_[k])});
    const RBFit f = fit_rb(curve);
    fits[name] = to_json(f);
    return f;
  };
  const RBFit ft = run_target(kTransmon, "transmon");
  b.summary["transmon_fidelity"] = ft.F;
  b.summary["fidelity"] = ft.F;
  if (c.mode >= 0) {
    const RBFit fp = run_target(c.mode, "mode" + std::to_string(c.mode));
    const double swap = ((1.0 - fp.F) - (1.0 - ft.F)) / 2.0;
    fits["swap_infidelity"] = swap;
    b.summary["fidelity"] = fp.F;
    b.summary["depolarizing_p"] = fp.p;
    b.summary["swap_infidelity"] = swap;
  }
  b.files["survival.csv"] = csv;
  b.files["fit.json"] = fits.dump(2) + "\n";
  return b;
}

/// Two-qubit circuit: qubit 0 in the transmon, qubit 1 in `mode`, `count` C_phi gates.
inline LogicalCircuit cphi_core(double phi, int mode, int count) {
  LogicalCircuit c(2);
  c.home = {kTransmon, mode};
  for (int k = 0; k < count; ++k) c.controlled_phase(0, 1, phi);
  return c;
}

inline CMatrix cphi_target(double phi, int count) {
  CMatrix u = CMatrix::Identity(4, 4);
  u(3, 3) = std::exp(kI * (phi * count));
  return u;
}

inline TomographyOptions tomography_options(const ExperimentConfig& c, std::uint64_t seed) {
  TomographyOptions t;
  t.compile = compile_options(c);
  t.ideal_prep = spam_flags(c.spam).ideal_prep;
  t.shots = c.shots;
  t.seed = seed;
  return t;
}

struct ProcessScore {
  PhaseCompensation compensation;
  double raw_fidelity = 0.0;
};

inline ProcessScore score_process(const CMatrix& e, const CMatrix& target, int n) {
  return {compensate_local_phases(e, target, n), average_gate_fidelity(e, target)};
}

inline ProcessScore cphi_fidelity(const ExperimentContext& ctx, double phi, int count, std::uint64_t seed,
                                  CircuitTomography* keep = nullptr) {
  auto t = simulate_process_tomography(ctx.executor, cphi_core(phi, ctx.config.mode, count),
                                       tomography_options(ctx.config, seed));
  ProcessScore s = score_process(t.process.entries, cphi_target(phi, count), 2);
  if (keep) *keep = std::move(t);
  return s;
}

inline ResultBundle run_cphi_tomo(const ExperimentContext& ctx) {
  const auto& c = ctx.config;
  CircuitTomography t;
  const ProcessScore s = cphi_fidelity(ctx, c.phi, 1, c.seed, &t);
  ResultBundle b = new_bundle(ctx);
  const CPhiParams p = solve_cphi(c.phi, ctx.device.g());
  b.summary["phi"] = c.phi;
  b.summary["fidelity"] = s.compensation.fidelity;
  b.summary["raw_fidelity"] = s.raw_fidelity;
  b.summary["local_phases"] = s.compensation.phases;
  b.summary["delta_rad_s"] = p.delta;
  b.summary["t_int_s"] = p.t_int;
  b.summary["theta"] = p.theta;
  b.files["chi.json"] = chi_json(superop_to_chi(t.process.entries, 2), 2).dump(2) + "\n";
  b.files["schedule.json"] = schedule_json(t.core_schedule).dump(2) + "\n";
  return b;
}

inline ResultBundle run_cphi_repeat(const ExperimentContext& ctx) {
  const auto& c = ctx.config;
  std::vector<double> ns, fs;
  std::string csv = csv_row({"N", "fidelity", "raw_fidelity"});
  for (int k = 0; k < c.repetitions; ++k) {
    const ProcessScore s = cphi_fidelity(ctx, c.phi, k, c.seed + static_cast<std::uint64_t>(k));
    ns.push_back(k);
    fs.push_back(s.compensation.fidelity);
    csv += csv_row({std::to_string(k), format_number(s.compensation.fidelity), format_number(s.raw_fidelity)});
  }
  const RepetitionFit r = repeated_gate_fidelity(fs, ns);
  ResultBundle b = new_bundle(ctx);
  b.summary["phi"] = c.phi;
  b.summary["fidelity"] = r.fidelity;
  b.summary["sigma"] = r.sigma;
  b.files["records.csv"] = csv;
  b.files["fit.json"] = nlohmann::json{{"fidelity", r.fidelity}, {"sigma", r.sigma}, {"A", r.A}, {"B", r.B}}.dump(2) + "\n";
  return b;
}

struct QftTomography {
  CircuitTomography tomography;
  ProcessScore score;
  std::vector<double> hadamard_phases;
};

/// Hadamard phases come from the frame ledger in ideal runs and from
/// in-context calibration sweeps otherwise.
inline QftTomography qft_tomography(const ExperimentContext& ctx, int n = 3) {
  const auto& c = ctx.config;
  TomographyOptions t = tomography_options(c, c.seed);
  QftTomography out;
  if (c.decoherence != DecoherenceMode::none) {
    const auto cal = calibrate_hadamard_phases(ctx.executor, t.compile, n, c.sweep_points, t.ideal_prep);
    for (int k = 0; k < n; ++k) t.compile.hadamard_phase[k] = cal.phases[static_cast<size_t>(k)];
    out.hadamard_phases = cal.phases;
  }
  const LogicalCircuit core = build_qft(n, false);
  out.tomography = simulate_process_tomography(ctx.executor, core, t);
  if (out.hadamard_phases.empty()) out.hadamard_phases = out.tomography.core_schedule.hadamard_phases;
  out.score = score_process(out.tomography.process.entries, circuit_unitary(core), n);
  return out;
}

inline ResultBundle run_qft_tomo(const ExperimentContext& ctx) {
  const QftTomography q = qft_tomography(ctx);
  ResultBundle b = new_bundle(ctx);
  b.summary["fidelity"] = q.score.compensation.fidelity;
  b.summary["raw_fidelity"] = q.score.raw_fidelity;
  b.summary["local_phases"] = q.score.compensation.phases;
  b.summary["hadamard_phases"] = q.hadamard_phases;
  b.files["chi.json"] = chi_json(superop_to_chi(q.tomography.process.entries, 3), 3).dump(2) + "\n";
  b.files["schedule.json"] = schedule_json(q.tomography.core_schedule).dump(2) + "\n";
  return b;
}

/// Exact outcome distribution of the period-finding circuit, indexed by
/// y = b(q2) + 2 b(q1) + 4 b(q0).
inline std::vector<double> qpf_distribution(const ExperimentContext& ctx, int r, CompiledSchedule* keep = nullptr) {
  const auto& c = ctx.config;
  const LogicalCircuit full = build_qpf(r);
  const bool ideal_prep = spam_flags(c.spam).ideal_prep;
  LogicalCircuit body(full.n_qubits);
  body.home = full.home;
  std::vector<PrepLabel> labels(static_cast<size_t>(full.n_qubits), PrepLabel::zero);
  for (const auto& g : full.gates) {
    if (ideal_prep && g.type == GateType::prepare) labels[static_cast<size_t>(g.q)] = g.label;
    else body.gates.push_back(g);
  }
  const CompiledSchedule s = compile(body, ctx.device, compile_options(c));
  SimState st = ideal_prep ? prepared_state(ctx.executor, body.home, s.initial_modes, labels)
                           : ctx.executor.ground_state(s.initial_modes);
  ctx.executor.run(st, s.segments);
  std::vector<double> p(8, 0.0);
  for (const auto& [bits, prob] : outcome_probabilities(st)) {
    if (bits.size() != 3) throw DimensionError("qpf: expected three outcome bits");
    p[static_cast<size_t>(bits[0] + 2 * bits[1] + 4 * bits[2])] += prob;
  }
  if (keep) *keep = s;
  return p;
}

/// One shot-sampled readout with misassignment, corrected by inversion.
inline std::vector<double> qpf_measured(const std::vector<double>& exact, const ExperimentConfig& c, std::mt19937_64& rng) {
  if (c.shots <= 0) return exact;
  const bool readout_errors = !spam_flags(c.spam).ideal_measure;
  const MisassignmentModel m = readout_errors ? MisassignmentModel{c.f_g, c.f_e} : MisassignmentModel{1.0, 1.0};
  const auto raw = sample_frequencies(apply_misassignment(exact, m), c.shots, rng);
  return readout_errors ? correct_misassignment(raw, m).p : raw;
}

inline ResultBundle run_qpf(const ExperimentContext& ctx) {
  const auto& c = ctx.config;
  CompiledSchedule sch;
  const std::vector<double> exact = qpf_distribution(ctx, c.period, &sch);
  const std::vector<double> ideal = qpf_theoretical_distribution(qpf_truth_table(c.period));
  std::mt19937_64 rng(c.seed);
  std::string runs_csv = csv_row({"run", "period", "peaks"});
  int successes = 0;
  std::vector<double> first;
  PeakClassification first_cls;
  const int runs = c.shots > 0 ? std::max(1, c.runs) : 1;
  for (int k = 0; k < runs; ++k) {
    const auto measured = qpf_measured(exact, c, rng);
    PeakClassification cls;
    std::string peaks;
    try {
      cls = classify_and_extract_period(measured);
      for (int y : cls.peaks) peaks += (peaks.empty() ? "" : " ") + std::to_string(y);
    } catch (const std::exception&) {
      cls.period = 0;
    }
    if (cls.period == c.period) ++successes;
    runs_csv += csv_row({std::to_string(k), std::to_string(cls.period), peaks});
    if (k == 0) {
      first = measured;
      first_cls = cls;
    }
  }
  std::string pop = csv_row({"y", "ideal", "simulated", "measured"});
  for (int y = 0; y < 8; ++y)
    pop += csv_row({std::to_string(y), format_number(ideal[static_cast<size_t>(y)]),
                    format_number(exact[static_cast<size_t>(y)]), format_number(first[static_cast<size_t>(y)])});
  nlohmann::json comps = nlohmann::json::array();
  for (const auto& comp : first_cls.mixture.components)
    comps.push_back({{"alpha", comp.alpha}, {"beta", comp.beta}, {"weight", comp.weight}});
  const nlohmann::json cls_json{{"peaks", first_cls.peaks},       {"gcd", first_cls.gcd},
                                {"period", first_cls.period},     {"p_zero", first_cls.p_zero},
                                {"components", comps},            {"iterations", first_cls.mixture.iterations},
                                {"log_likelihood", first_cls.mixture.log_likelihood}};
  ResultBundle b = new_bundle(ctx);
  b.summary["period"] = c.period;
  b.summary["recovered_period"] = first_cls.period;
  b.summary["runs"] = runs;
  b.summary["successes"] = successes;
  b.summary["distribution"] = exact;
  b.files["populations.csv"] = pop;
  b.files["classification.json"] = cls_json.dump(2) + "\n";
  b.files["records.csv"] = runs_csv;
  b.files["schedule.json"] = schedule_json(sch).dump(2) + "\n";
  return b;
}

inline std::string sweep_csv(const std::string& column, const PhaseSweep& s) {
  std::string csv = csv_row({column, "population"});
  for (size_t k = 0; k < s.x.size(); ++k) csv += csv_row({format_number(s.x[k]), format_number(s.population[k])});
  return csv;
}

inline ResultBundle run_calibrate(const ExperimentContext& ctx) {
  const auto& c = ctx.config;
  const int mode = std::max(0, c.mode);
  ResultBundle b = new_bundle(ctx);
  const auto theta = calibrate_theta(c.phi, ctx.executor, mode, std::max(c.sweep_points, 32), c.pulse_duration);
  b.summary["theta"] = theta.optimum;
  b.summary["theta_closed_form"] = solve_cphi(c.phi, ctx.device.g()).theta;
  b.files["theta_sweep.csv"] = sweep_csv("theta", theta);

  const auto ramsey = ramsey_phonon_frequency(ctx.executor, mode);
  b.summary["ramsey_frequency_hz"] = ramsey.frequency_hz;
  std::string rcsv = csv_row({"wait_s", "population"});
  for (size_t k = 0; k < ramsey.waits.size(); ++k)
    rcsv += csv_row({format_number(ramsey.waits[k]), format_number(ramsey.population[k])});
  b.files["ramsey.csv"] = rcsv;

  const CompileOptions o = compile_options(c);
  const auto had = calibrate_hadamard_phases(ctx.executor, o, 3, c.sweep_points);
  b.summary["hadamard_phases"] = had.phases;
  b.summary["hadamard_ledger_phases"] = had.ledger_phases;
  std::string hcsv = csv_row({"hadamard", "phase", "population"});
  for (size_t k = 0; k < had.sweeps.size(); ++k)
    for (size_t i = 0; i < had.sweeps[k].x.size(); ++i)
      hcsv += csv_row({std::to_string(k), format_number(had.sweeps[k].x[i]), format_number(had.sweeps[k].population[i])});
  b.files["hadamard_sweeps.csv"] = hcsv;

  const auto cnot = calibrate_cnot_phase(ctx.executor, o, mode, c.sweep_points);
  b.summary["cnot_phase"] = cnot.phase;
  b.summary["cnot_ledger_phase"] = cnot.ledger_phase;
  b.files["cnot_sweep.csv"] = sweep_csv("phase", cnot.sweep);
  return b;
}

/// Dispatches a named experiment.
inline ResultBundle run(const ExperimentConfig& config) {
  const auto& names = experiment_names();
  if (std::find(names.begin(), names.end(), config.experiment) == names.end())
    throw std::invalid_argument("unknown experiment '" + config.experiment + "'");
  const ExperimentContext ctx(config);
  if (config.experiment == "rb") return run_rb_experiment(ctx);
  if (config.experiment == "cphi-tomo") return run_cphi_tomo(ctx);
  if (config.experiment == "cphi-repeat") return run_cphi_repeat(ctx);
  if (config.experiment == "qft-tomo") return run_qft_tomo(ctx);
  if (config.experiment == "qpf") return run_qpf(ctx);
  return run_calibrate(ctx);
}

}  // namespace mrqc
