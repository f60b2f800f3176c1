// Command-line front end: sensitivity analysis for matched-pair studies
// under effect modification.
//
// Exit codes: 0 ok, 1 usage, 2 data validation, 3 degenerate statistic,
// 4 numeric failure.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "submax/submax.hpp"

namespace {

using namespace submax;

struct RunConfig {
  std::string data_path;
  std::string simulate;  // "<situation>:<seed>[:<replication>]"
  std::string method = "group-m";
  std::vector<double> gammas;
  double alpha = 0.05;
  double gamma_max = 10.0;
  double step = 0.05;
  std::string direction = "greater";
  std::uint64_t seed = 12345;
  std::string format = "tsv";
  std::string out_path;
  PsiParams psi{};
  MvnSettings mvn{};
  // power
  std::string situation = "all";
  std::string power_method = "all";
  std::size_t reps = 10000;
  bool null_override = false;
  int threads = 0;
  // critval
  std::string rho_path;
};

void write_output(const RunConfig& cfg, const std::string& text) {
  if (cfg.out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(cfg.out_path);
  if (!out) {
    throw ValidationError("cannot open output file `" + cfg.out_path + "`");
  }
  out << text;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

struct SimulateSpec {
  int situation = 0;
  std::uint64_t seed = 0;
  std::uint64_t replication = 0;
};

SimulateSpec parse_simulate(const std::string& text) {
  SimulateSpec spec;
  std::istringstream in(text);
  std::string part;
  std::vector<std::string> parts;
  while (std::getline(in, part, ':')) parts.push_back(part);
  if (parts.size() < 2 || parts.size() > 3) {
    throw CLI::ValidationError(
        "--simulate", "expected <situation>:<seed>[:<replication>]");
  }
  try {
    spec.situation = std::stoi(parts[0]);
    spec.seed = std::stoull(parts[1]);
    if (parts.size() == 3) spec.replication = std::stoull(parts[2]);
  } catch (const std::exception&) {
    throw CLI::ValidationError("--simulate", "malformed value `" + text + "`");
  }
  return spec;
}

GroupedStudy load_study(const RunConfig& cfg) {
  const bool negate = cfg.direction == "less";
  if (!cfg.simulate.empty()) {
    const SimulateSpec spec = parse_simulate(cfg.simulate);
    GroupedStudy study = generate_study(SamplingSituation::configured(spec.situation),
                                        spec.seed, spec.replication);
    if (negate) {
      for (PairDifference& p : study.pairs) p.d = -p.d;
    }
    return study;
  }
  return load_pairs_csv(cfg.data_path, negate);
}

ScoreMethod method_of(const std::string& name) {
  const std::optional<ScoreMethod> m = parse_score_method(name);
  if (!m) {
    throw CLI::ValidationError("--method", "unknown score method `" + name + "`");
  }
  return *m;
}

ReportContext make_context(const RunConfig& cfg, const std::string& command,
                           const std::string& method_name) {
  ReportContext ctx;
  ctx.command = command;
  ctx.input = !cfg.simulate.empty() ? "simulate:" + cfg.simulate : cfg.data_path;
  ctx.method = method_name;
  ctx.direction = cfg.direction;
  ctx.alpha = cfg.alpha;
  ctx.psi = cfg.psi;
  ctx.mvn = cfg.mvn;
  ctx.seed = cfg.seed;
  return ctx;
}

void print_warnings(const std::vector<std::string>& warnings) {
  for (const std::string& w : warnings) {
    std::cerr << "warning: " << w << "\n";
  }
}

int run_analyze(RunConfig& cfg) {
  const ScoreMethod method = method_of(cfg.method);
  cfg.mvn.seed = cfg.seed;
  const GroupedStudy study = load_study(cfg);
  const SubmaxAnalyzer analyzer(study, method, cfg.psi, cfg.alpha, cfg.mvn);
  print_warnings(analyzer.warnings());
  std::vector<SubmaxResult> results;
  results.reserve(cfg.gammas.size());
  for (double gamma : cfg.gammas) results.push_back(analyzer.test(gamma));
  const ReportContext ctx = make_context(cfg, "analyze", to_string(method));
  write_output(cfg, cfg.format == "json" ? dump(analyze_report_json(ctx, results))
                                         : analyze_report_tsv(ctx, results));
  return 0;
}

int run_sensitivity_value(RunConfig& cfg) {
  const ScoreMethod method = method_of(cfg.method);
  cfg.mvn.seed = cfg.seed;
  const GroupedStudy study = load_study(cfg);
  const SensitivityValue sv = sensitivity_value(
      study, method, cfg.psi, cfg.alpha, cfg.gamma_max, cfg.step, cfg.mvn);
  const ReportContext ctx = make_context(cfg, "sensitivity-value", to_string(method));
  write_output(cfg, cfg.format == "json" ? dump(sensitivity_value_json(ctx, sv))
                                         : sensitivity_value_tsv(ctx, sv));
  return 0;
}

Eigen::MatrixXd load_rho(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open rho file `" + path + "`");
  Json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ValidationError("rho file `" + path + "`: invalid JSON: " + e.what());
  }
  if (j.is_object() && j.contains("rho")) j = j["rho"];
  if (!j.is_array() || j.empty()) {
    throw ValidationError("rho file `" + path + "`: expected a K x K array");
  }
  const int K = static_cast<int>(j.size());
  Eigen::MatrixXd rho(K, K);
  for (int i = 0; i < K; ++i) {
    if (!j[i].is_array() || static_cast<int>(j[i].size()) != K) {
      throw ValidationError("rho file `" + path + "`: row " +
                            std::to_string(i + 1) + " is not length " +
                            std::to_string(K));
    }
    for (int k = 0; k < K; ++k) rho(i, k) = j[i][k].get<double>();
  }
  return rho;
}

int run_critval(RunConfig& cfg) {
  cfg.mvn.seed = cfg.seed;
  Eigen::MatrixXd rho;
  std::string method_name;
  if (!cfg.rho_path.empty()) {
    rho = load_rho(cfg.rho_path);
  } else {
    const ScoreMethod method = method_of(cfg.method);
    method_name = to_string(method);
    const GroupedStudy study = load_study(cfg);
    const SubmaxAnalyzer analyzer(study, method, cfg.psi, cfg.alpha, cfg.mvn);
    print_warnings(analyzer.warnings());
    rho = analyzer.rho();
  }
  const CriticalValueInfo info = critical_value_info(rho, cfg.alpha, cfg.mvn);
  ReportContext ctx = make_context(cfg, "critval", method_name);
  if (!cfg.rho_path.empty()) ctx.input = cfg.rho_path;
  const int K = static_cast<int>(rho.rows());
  write_output(cfg, cfg.format == "json" ? dump(critval_json(ctx, K, info))
                                         : critval_tsv(ctx, K, info));
  return 0;
}

int run_export_scores(RunConfig& cfg) {
  const GroupedStudy study = load_study(cfg);
  const std::vector<ScoreExportRow> rows = build_score_export(study, cfg.psi);
  const ReportContext ctx = make_context(cfg, "export-scores", "");
  write_output(cfg, cfg.format == "json" ? dump(scores_json(ctx, rows))
                                         : scores_tsv(ctx, rows));
  return 0;
}

std::vector<double> default_power_gammas(int situation) {
  return situation == 1 ? std::vector<double>{1, 2, 3, 4}
                        : std::vector<double>{1, 2, 3, 4, 5};
}

int run_power(RunConfig& cfg, bool se_given, bool max_samples_given) {
  std::vector<int> situations;
  if (cfg.situation == "all") {
    situations = {1, 2, 3, 4, 5};
  } else {
    try {
      situations = {std::stoi(cfg.situation)};
    } catch (const std::exception&) {
      throw CLI::ValidationError("--situation", "expected 1..5 or `all`");
    }
  }
  std::vector<ScoreMethod> methods;
  if (cfg.power_method == "all") {
    methods = {ScoreMethod::mean_difference, ScoreMethod::m_statistic,
               ScoreMethod::group_m_statistic};
  } else {
    methods = {method_of(cfg.power_method)};
  }
  PowerOptions opts;  // keeps the harness's looser target_se unless overridden
  opts.psi = cfg.psi;
  if (se_given) opts.mvn.target_se = cfg.mvn.target_se;
  if (max_samples_given) opts.mvn.max_samples = cfg.mvn.max_samples;
  opts.null_override = cfg.null_override;
  opts.threads = cfg.threads;

  std::vector<PowerResult> rows;
  for (int sit_id : situations) {
    const SamplingSituation sit = SamplingSituation::configured(sit_id);
    const std::vector<double> gammas =
        cfg.gammas.empty() ? default_power_gammas(sit_id) : cfg.gammas;
    for (ScoreMethod method : methods) {
      const std::vector<PowerResult> part = estimate_power_curve(
          sit, method, gammas, cfg.alpha, cfg.reps, cfg.seed, opts);
      rows.insert(rows.end(), part.begin(), part.end());
    }
  }
  ReportContext ctx = make_context(cfg, "power", cfg.power_method);
  ctx.input = "situation:" + cfg.situation +
              (cfg.null_override ? " (null override)" : "");
  ctx.mvn = opts.mvn;
  write_output(cfg, cfg.format == "json" ? dump(power_report_json(ctx, rows))
                                         : power_report_tsv(ctx, rows));
  return 0;
}

void add_io_options(CLI::App* cmd, RunConfig& cfg, bool with_data) {
  if (with_data) {
    auto* data = cmd->add_option("--data", cfg.data_path,
                                 "CSV file: pair_id,cov_1,...,cov_L,d");
    auto* sim = cmd->add_option(
        "--simulate", cfg.simulate,
        "generate input: <situation>:<seed>[:<replication>]");
    data->excludes(sim);
    cmd->add_option("--direction", cfg.direction,
                    "alternative direction; `less` negates d at ingestion")
        ->check(CLI::IsMember({"greater", "less"}));
  }
  cmd->add_option("--alpha", cfg.alpha, "one-sided level")
      ->check(CLI::Range(1e-8, 1.0 - 1e-8))
      ->capture_default_str();
  cmd->add_option("--seed", cfg.seed, "RNG seed")
      ->envname("SUBMAX_SEED")
      ->capture_default_str();
  cmd->add_option("--format", cfg.format, "output format")
      ->check(CLI::IsMember({"tsv", "json"}))
      ->capture_default_str();
  cmd->add_option("--out", cfg.out_path, "output file (default stdout)");
  cmd->add_option("--psi-inner", cfg.psi.inner, "psi inner parameter a")
      ->capture_default_str();
  cmd->add_option("--psi-trim", cfg.psi.trim, "psi trimming parameter t")
      ->capture_default_str();
  cmd->add_option("--mvn-target-se", cfg.mvn.target_se,
                  "target standard error of MVN probabilities")
      ->capture_default_str();
  cmd->add_option("--mvn-max-samples", cfg.mvn.max_samples,
                  "sample budget per MVN probability")
      ->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  RunConfig cfg;
  CLI::App app{
      "submax: sensitivity analysis for matched-pair observational studies "
      "under effect modification"};
  app.require_subcommand(1);
  std::string version = std::string("submax ") + kVersion +
                        " (psi defaults: inner=0 trim=3; mvn defaults: "
                        "target_se=0.0005 max_samples=1048576)";
  app.set_version_flag("--version", version);

  CLI::App* analyze = app.add_subcommand(
      "analyze", "per-comparison deviates, critical value and decision");
  add_io_options(analyze, cfg, true);
  analyze->add_option("--method", cfg.method,
                      "score method: mean-diff | m | group-m")
      ->capture_default_str();
  analyze->add_option("--gamma", cfg.gammas, "gamma values (comma separated)")
      ->required()
      ->delimiter(',')
      ->check(CLI::Range(1.0, 1e6));

  CLI::App* sens = app.add_subcommand(
      "sensitivity-value", "largest gamma on a grid that still rejects");
  add_io_options(sens, cfg, true);
  sens->add_option("--method", cfg.method, "score method")
      ->capture_default_str();
  sens->add_option("--gamma-max", cfg.gamma_max, "upper end of the gamma grid")
      ->check(CLI::Range(1.0, 1e6))
      ->capture_default_str();
  sens->add_option("--step", cfg.step, "gamma grid step")
      ->check(CLI::Range(1e-6, 1e6))
      ->capture_default_str();

  CLI::App* critval = app.add_subcommand(
      "critval", "equicoordinate critical value for a correlation matrix");
  add_io_options(critval, cfg, true);
  critval->add_option("--rho", cfg.rho_path,
                      "JSON file with a K x K correlation matrix");
  critval->add_option("--method", cfg.method,
                      "score method (when computing rho from data)")
      ->capture_default_str();

  CLI::App* power = app.add_subcommand(
      "power", "power of the sensitivity analysis by simulation");
  add_io_options(power, cfg, false);
  power->add_option("--situation", cfg.situation, "sampling situation: 1..5 or all")
      ->capture_default_str();
  power->add_option("--method", cfg.power_method,
                    "score method or `all`")
      ->capture_default_str();
  power->add_option("--gamma", cfg.gammas,
                    "gamma values (default: the situation's grid)")
      ->delimiter(',')
      ->check(CLI::Range(1.0, 1e6));
  power->add_option("--reps", cfg.reps, "number of replications")
      ->check(CLI::Range(std::size_t{1}, std::size_t{100000000}))
      ->capture_default_str();
  power->add_flag("--null-override", cfg.null_override,
                  "zero both block effects (level check)");
  power->add_option("--threads", cfg.threads,
                    "worker threads (0 = hardware)")
      ->capture_default_str();

  CLI::App* exps = app.add_subcommand(
      "export-scores", "per-pair scores on the raw-data scale");
  add_io_options(exps, cfg, true);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (app.got_subcommand(analyze)) {
      if (cfg.data_path.empty() && cfg.simulate.empty()) {
        std::cerr << "analyze: either --data or --simulate is required\n";
        return 1;
      }
      return run_analyze(cfg);
    }
    if (app.got_subcommand(sens)) {
      if (cfg.data_path.empty() && cfg.simulate.empty()) {
        std::cerr << "sensitivity-value: either --data or --simulate is required\n";
        return 1;
      }
      return run_sensitivity_value(cfg);
    }
    if (app.got_subcommand(critval)) {
      if (cfg.rho_path.empty() && cfg.data_path.empty() && cfg.simulate.empty()) {
        std::cerr << "critval: one of --rho, --data, --simulate is required\n";
        return 1;
      }
      return run_critval(cfg);
    }
    if (app.got_subcommand(power)) {
      if (cfg.power_method != "all") method_of(cfg.power_method);
      return run_power(cfg, power->count("--mvn-target-se") > 0,
                       power->count("--mvn-max-samples") > 0);
    }
    if (app.got_subcommand(exps)) {
      if (cfg.data_path.empty() && cfg.simulate.empty()) {
        std::cerr << "export-scores: either --data or --simulate is required\n";
        return 1;
      }
      return run_export_scores(cfg);
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const DegenerateScale& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const EmptyGroup& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const DegenerateVariance& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const NumericError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 4;
  }
  return 1;
}
