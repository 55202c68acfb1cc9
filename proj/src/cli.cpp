#include "mdm/cli.hpp"

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <string>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "mdm/errors.hpp"
#include "mdm/estimator.hpp"
#include "mdm/harness.hpp"
#include "mdm/model_io.hpp"
#include "mdm/report.hpp"

namespace mdm::cli {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

struct RunConfig {
  std::string model_path;
  std::string preset_name;
  std::string data_path;
  std::string L = "auto";
  std::string method = "ordinary";
  std::string input_mode = "known";
  std::uint64_t seed = 0;
  Index n_mc = 0;
  Index tau = 0;
  unsigned workers = 0;
  std::string out = ".";
  Tolerance tol;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

json to_json(const Mat& m) {
  json rows = json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

json to_json(const Vec& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(v(i));
  return out;
}

std::string sci(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6e", x);
  return buf;
}

InputMode parse_mode(const std::string& s) {
  if (s == "known") return InputMode::known;
  if (s == "unknown") return InputMode::unknown;
  throw UsageError("--input-mode must be 'known' or 'unknown'");
}

McMethod parse_method(const std::string& s) {
  if (s == "ordinary") return McMethod::ordinary;
  if (s == "weighted") return McMethod::weighted;
  throw UsageError("--method must be 'ordinary' or 'weighted'");
}

ModelSpec from_preset(const BenchmarkSpec& b) {
  ModelSpec s;
  s.model = b.model;
  s.structure = b.structure;
  s.alpha_true = b.alpha_true;
  s.init = b.init;
  s.input = b.input;
  s.sinusoidal_input = b.input.has_value();
  return s;
}

ModelSpec load_model(const RunConfig& cfg) {
  if (!cfg.preset_name.empty()) {
    if (!cfg.model_path.empty()) throw UsageError("give either --model or --preset, not both");
    const Index samples = cfg.tau > 0 ? cfg.tau : 1000;
    return from_preset(preset(cfg.preset_name, samples));
  }
  if (cfg.model_path.empty()) throw UsageError("--model (or --preset) is required");
  return load_model_spec(cfg.model_path);
}

/// Stretches a time-invariant model to the data horizon; time-varying models
/// must match it.
void fit_horizon(LtvModel& model, Index data_tau) {
  if (data_tau == model.tau) return;
  if (model.is_time_invariant()) {
    model.tau = data_tau;
    return;
  }
  throw ValidationError("data covers k=0.." + std::to_string(data_tau) +
                        " but the time-varying model is defined for k=0.." +
                        std::to_string(model.tau));
}

Index resolve_window(const RunConfig& cfg, const LtvModel& model, InputMode mode,
                     std::ostream& out) {
  if (cfg.L != "auto") {
    std::size_t used = 0;
    long long L = 0;
    try {
      L = std::stoll(cfg.L, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != cfg.L.size() || L < 1) throw UsageError("--L must be a positive integer or 'auto'");
    if (L > model.tau + 1) {
      throw DimensionError("horizon too short: " + std::to_string(model.tau + 1) +
                           " samples cannot hold a window of length L=" + std::to_string(L));
    }
    return static_cast<Index>(L);
  }
  const auto L = minimal_window(model, mode, cfg.tol);
  if (!L) {
    throw NoAnnihilator("no window length up to " + std::to_string(model.tau + 1) +
                            " admits an annihilator for every k",
                        -1, std::nullopt);
  }
  out << "L auto: selected L=" << *L << "\n";
  return *L;
}

bool has_input_gain(const LtvModel& model) {
  for (Index k = 0; k <= model.tau; ++k) {
    if (!model.G.at(k).isZero(0.0)) return true;
  }
  return false;
}

json identifiability_json(const IdentifiabilityReport& rep) {
  return {{"rank", rep.rank},
          {"n_alpha", rep.n_alpha},
          {"threshold", rep.threshold},
          {"singular_values", to_json(rep.singular_values)},
          {"null_basis", to_json(rep.null_basis)},
          {"participation", to_json(rep.participation)}};
}

void print_identifiability(const IdentifiabilityReport& rep, std::ostream& out) {
  out << "rank " << rep.rank << " of " << rep.n_alpha << " (threshold "
      << sci(rep.threshold) << ")\n";
  out << "singular values (equilibrated design):";
  for (Index i = 0; i < rep.singular_values.size(); ++i) out << " " << sci(rep.singular_values(i));
  out << "\n";
  if (rep.full_rank()) {
    out << "all parameters identifiable\n";
    return;
  }
  out << "unidentifiable directions (columns), with participation per parameter:\n";
  for (Index i = 0; i < rep.n_alpha; ++i) {
    out << "  alpha_" << (i + 1) << ":";
    for (Index c = 0; c < rep.null_basis.cols(); ++c) out << " " << sci(rep.null_basis(i, c));
    out << "   participation " << sci(rep.participation(i)) << "\n";
  }
}

int cmd_identify(const RunConfig& cfg, std::ostream& out) {
  ModelSpec spec = load_model(cfg);
  MeasurementData data = read_measurements(cfg.data_path);
  if (data.z.empty()) throw ValidationError("data file holds no measurements");
  fit_horizon(spec.model, data.tau());
  const InputMode mode = parse_mode(cfg.input_mode);
  const McMethod method = parse_method(cfg.method);
  if (mode == InputMode::unknown) data.u.reset();
  if (mode == InputMode::known && !data.u && has_input_gain(spec.model)) {
    throw ValidationError("data has no 'u' fields but the model has a nonzero G; supply the "
                          "inputs or use --input-mode unknown");
  }
  const Index L = resolve_window(cfg, spec.model, mode, out);

  const auto start = std::chrono::steady_clock::now();
  const StackedSystem sys =
      build_stacked_system(spec.model, spec.structure, data, L, mode, cfg.tol);
  const IdentifiabilityReport rep = identifiability_report(sys, cfg.tol);
  if (!rep.full_rank()) {
    print_identifiability(rep, out);
    throw RankDeficientDesign(rep.rank, rep.n_alpha);
  }
  const OrdinarySolver solver(sys.design(), cfg.tol);
  const Estimate est = method == McMethod::ordinary
                           ? ordinary_mdm(sys, solver)
                           : three_step_weighted_pipeline(sys, spec.structure, solver, cfg.tol);
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;

  const NoiseCovariances qr = assemble_qr(spec.structure, est.alpha);
  json result = {{"method", to_string(est.method)},
                 {"L", L},
                 {"input_mode", to_string(mode)},
                 {"samples", data.tau() + 1},
                 {"alpha", to_json(est.alpha)},
                 {"Q", to_json(qr.Q)},
                 {"R", to_json(qr.R)},
                 {"identifiability", identifiability_json(est.identifiability)},
                 {"tolerance", {{"rank_tol", cfg.tol.rank_tol}, {"zero_tol", cfg.tol.zero_tol}}}};
  if (est.cov) result["cov"] = to_json(*est.cov);
  if (est.diagnostics.alpha_ordinary) {
    result["alpha_ordinary"] = to_json(*est.diagnostics.alpha_ordinary);
  }
  result["warnings"] = est.diagnostics.warnings;

  const fs::path dir = cfg.out;
  write_text_file(dir / "identify_result.json", result.dump(2) + "\n");
  write_text_file(dir / "identify_timing.json",
                  json({{"wall_time_s", elapsed.count()}}).dump(2) + "\n");

  out << to_string(est.method) << " MDM, L=" << L << ", " << data.tau() + 1 << " samples\n";
  for (Index i = 0; i < est.alpha.size(); ++i) {
    out << "  alpha_" << (i + 1) << " = " << sci(est.alpha(i));
    if (est.cov) out << "  (std " << sci(std::sqrt(std::max(0.0, (*est.cov)(i, i)))) << ")";
    out << "\n";
  }
  for (const auto& w : est.diagnostics.warnings) out << "warning: " << w << "\n";
  out << "result written to " << (dir / "identify_result.json").string() << "\n";
  return kOk;
}

int cmd_simulate(const RunConfig& cfg, std::ostream& out) {
  ModelSpec spec = load_model(cfg);
  if (!spec.alpha_true) throw ValidationError("model file has no 'alpha_true' to simulate from");
  if (cfg.tau > 0 && cfg.preset_name.empty() && cfg.tau - 1 != spec.model.tau) {
    if (!spec.model.is_time_invariant()) {
      throw ValidationError("--tau cannot change the horizon of a time-varying model");
    }
    spec.model.tau = cfg.tau - 1;
    if (spec.sinusoidal_input) {
      spec.input = sinusoidal_input(spec.model.tau, static_cast<double>(cfg.tau));
    }
  }
  const Trajectory t = simulate(spec.model, spec.structure, *spec.alpha_true, spec.init,
                                spec.input, cfg.seed);
  const MeasurementData data = MeasurementData::from_trajectory(t, spec.input.has_value());
  const fs::path path = cfg.data_path.empty() ? fs::path(cfg.out) / "data.jsonl"
                                              : fs::path(cfg.data_path);
  write_measurements(data, path);
  fs::path meta = path;
  meta += ".meta.json";
  write_text_file(meta, json({{"seed", cfg.seed}, {"samples", data.tau() + 1}}).dump(2) + "\n");
  out << "wrote " << data.tau() + 1 << " samples to " << path.string() << "\n";
  return kOk;
}

int cmd_benchmark(const RunConfig& cfg, const std::string& name, bool n_mc_set,
                  std::ostream& out) {
  const auto names = preset_names();
  const bool known = name == "clock" || std::ranges::find(names, name) != names.end();
  if (!known) throw UsageError("unknown preset '" + name + "'");
  BenchmarkSpec spec = preset(name, cfg.tau > 0 ? cfg.tau : 1000);
  if (n_mc_set) spec.n_mc = cfg.n_mc;
  spec.seed = cfg.seed;
  const McMethod method = parse_method(cfg.method);
  if (method == McMethod::weighted && spec.name == "clock-ensemble") {
    out << "note: weighted MDM on the clock ensemble is expensive (large P blocks)\n";
  }
  const unsigned workers =
      cfg.workers > 0 ? cfg.workers : std::max(1u, std::thread::hardware_concurrency());
  const McResult r = run_mc(spec, method, workers, cfg.tol);
  const OutputPaths paths = output_paths(cfg.out, spec.name, method);
  emit_table(r, paths.table_txt, paths.table_csv);
  emit_plot_data(r, paths.runs_csv);
  out << format_table_text(r);
  out << "wrote " << paths.table_txt.string() << ", " << paths.table_csv.string() << ", "
      << paths.runs_csv.string() << "\n";
  return kOk;
}

int cmd_identifiability(const RunConfig& cfg, std::ostream& out) {
  ModelSpec spec = load_model(cfg);
  if (cfg.tau > 0 && cfg.preset_name.empty() && spec.model.is_time_invariant()) {
    spec.model.tau = cfg.tau - 1;
  }
  const InputMode mode = parse_mode(cfg.input_mode);
  const Index L = resolve_window(cfg, spec.model, mode, out);
  const auto design = build_stacked_design(spec.model, spec.structure, L, mode, cfg.tol);
  out << "L=" << L << ", input mode " << to_string(mode) << ", " << design->rows()
      << " equations\n";
  print_identifiability(identifiability_report(design->design, cfg.tol), out);
  return kOk;
}

void add_common(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--rank-tol", cfg.tol.rank_tol, "relative singular-value threshold")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--zero-tol", cfg.tol.zero_tol, "absolute zero threshold")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--out", cfg.out, "output directory");
  cmd->add_option("--tau", cfg.tau, "number of measurement samples")->check(CLI::PositiveNumber);
}

void add_model(CLI::App* cmd, RunConfig& cfg) {
  cmd->add_option("--model", cfg.model_path, "model JSON file");
  cmd->add_option("--preset", cfg.preset_name, "use a built-in benchmark model instead");
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Noise covariance identification by the measurement difference method",
               "mdm"};
  app.require_subcommand(1);
  RunConfig cfg;
  std::string preset_arg;

  auto* identify = app.add_subcommand("identify", "estimate alpha, Q and R from data");
  add_model(identify, cfg);
  add_common(identify, cfg);
  identify->add_option("--data", cfg.data_path, "measurements (JSON Lines)")->required();
  identify->add_option("--L", cfg.L, "window length or 'auto'");
  identify->add_option("--method", cfg.method, "ordinary | weighted");
  identify->add_option("--input-mode", cfg.input_mode, "known | unknown");

  auto* sim = app.add_subcommand("simulate", "simulate measurements from a model file");
  add_model(sim, cfg);
  add_common(sim, cfg);
  sim->add_option("--seed", cfg.seed, "random seed");
  sim->add_option("--data", cfg.data_path, "output JSON Lines path (default <out>/data.jsonl)");

  auto* bench = app.add_subcommand("benchmark", "Monte-Carlo study of a preset");
  add_common(bench, cfg);
  bench->add_option("preset", preset_arg, "clock-ensemble | unobs-unknown-input | obs-ltv")
      ->required();
  bench->add_option("--method", cfg.method, "ordinary | weighted");
  bench->add_option("--seed", cfg.seed, "base seed; run i uses seed + i");
  auto* n_mc_opt =
      bench->add_option("--n-mc", cfg.n_mc, "number of Monte-Carlo runs")->check(CLI::PositiveNumber);
  bench->add_option("--workers", cfg.workers, "worker threads (default: all cores)");

  auto* ident = app.add_subcommand("identifiability", "rank of the design matrix");
  add_model(ident, cfg);
  add_common(ident, cfg);
  ident->add_option("--L", cfg.L, "window length or 'auto'");
  ident->add_option("--input-mode", cfg.input_mode, "known | unknown");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (identify->parsed()) return cmd_identify(cfg, out);
    if (sim->parsed()) return cmd_simulate(cfg, out);
    if (bench->parsed()) return cmd_benchmark(cfg, preset_arg, n_mc_opt->count() > 0, out);
    if (ident->parsed()) return cmd_identifiability(cfg, out);
  } catch (const UsageError& e) {
    err << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const IoError& e) {
    err << "I/O error: " << e.what() << "\n";
    return kIo;
  } catch (const ValidationError& e) {
    err << "invalid input: " << e.what() << "\n";
    return kValidation;
  } catch (const DimensionError& e) {
    err << "invalid input: " << e.what() << "\n";
    return kValidation;
  } catch (const NonPsdCovariance& e) {
    err << "invalid input: " << e.what() << "\n";
    return kValidation;
  } catch (const Error& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kNumerical;
  }
  return kUsage;
}

}  // namespace mdm::cli
