// Command-line front end: design generation, model fitting, sensitivity
// analysis, and benchmark studies.  Each subcommand reads a JSON config
// (schema-checked, unknown keys rejected), writes its outputs into --out,
// and prints a one-line machine-readable JSON status to stdout.
//
// Exit codes: 0 success (all computations converged, or --allow-nonconverged
// was given), 1 runtime/numerical failure, 2 configuration error.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "gpsobol/gpsobol.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  int threads = 0;  // 0: all available cores
  bool allow_nonconverged = false;
};

json load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw gpsobol::ConfigError("cannot open config file " + path);
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::exception& e) {
    throw gpsobol::ConfigError("invalid JSON in " + path + ": " + e.what());
  }
}

void ensure_out_dir(const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw gpsobol::ConfigError("cannot create output directory " + dir + ": " + ec.message());
}

double number_or(const json& j, const std::string& key, double fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number()) throw gpsobol::ConfigError("config key \"" + key + "\" must be a number");
  return j.at(key).get<double>();
}

std::int64_t integer_or(const json& j, const std::string& key, std::int64_t fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_number_integer())
    throw gpsobol::ConfigError("config key \"" + key + "\" must be an integer");
  return j.at(key).get<std::int64_t>();
}

bool boolean_or(const json& j, const std::string& key, bool fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_boolean())
    throw gpsobol::ConfigError("config key \"" + key + "\" must be a boolean");
  return j.at(key).get<bool>();
}

std::string string_at(const json& j, const std::string& key) {
  if (!j.at(key).is_string())
    throw gpsobol::ConfigError("config key \"" + key + "\" must be a string");
  return j.at(key).get<std::string>();
}

std::vector<Eigen::Index> sizes_from(const json& j, const std::string& key) {
  if (!j.at(key).is_array() || j.at(key).empty())
    throw gpsobol::ConfigError("config key \"" + key + "\" must be a non-empty integer array");
  std::vector<Eigen::Index> sizes;
  for (const auto& v : j.at(key)) {
    if (!v.is_number_integer() || v.get<std::int64_t>() < 2)
      throw gpsobol::ConfigError("config key \"" + key + "\" must hold integers >= 2");
    sizes.push_back(static_cast<Eigen::Index>(v.get<std::int64_t>()));
  }
  return sizes;
}

void write_json_file(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw gpsobol::ConfigError("cannot open output file " + path);
  out << j.dump(2) << '\n';
  if (!out) throw gpsobol::ConfigError("write failed for " + path);
}

void print_status(const json& j) { std::cout << j.dump() << std::endl; }

int cmd_lhs(const CommonArgs& args) {
  const json cfg = load_config(args.config_path);
  gpsobol::detail::require_keys(cfg, {"input_space", "n"}, {}, "lhs config");
  const auto space = gpsobol::InputSpace::from_json(cfg.at("input_space"));
  const std::int64_t n = integer_or(cfg, "n", 0);
  if (n < 1) throw gpsobol::ConfigError("lhs config: n must be a positive integer");
  ensure_out_dir(args.out_dir);
  const gpsobol::Design design = gpsobol::lhs_sample(space, n, args.seed);
  const std::string out_csv = args.out_dir + "/design.csv";
  gpsobol::write_design_csv(out_csv, design);
  print_status({{"status", "ok"},
                {"command", "lhs"},
                {"n", n},
                {"d", space.dim()},
                {"outputs", {out_csv}}});
  return 0;
}

int cmd_fit(const CommonArgs& args) {
  const json cfg = load_config(args.config_path);
  gpsobol::detail::require_keys(
      cfg, {"input_space", "design"},
      {"trend", "estimate_p", "p", "nugget", "multistarts", "theta_scaled_min",
       "theta_scaled_max"},
      "fit config");
  const auto space = gpsobol::InputSpace::from_json(cfg.at("input_space"));
  gpsobol::Design design = gpsobol::read_design_csv(string_at(cfg, "design"));
  if (!design.has_responses())
    throw gpsobol::ConfigError("fit config: design file must contain a response column y");
  if (design.dim() != space.dim())
    throw gpsobol::ConfigError("fit config: design has " + std::to_string(design.dim()) +
                               " input columns but the input space has " +
                               std::to_string(space.dim()));

  gpsobol::FitOptions options;
  options.seed = args.seed;
  options.estimate_p = boolean_or(cfg, "estimate_p", false);
  options.p_exponent = number_or(cfg, "p", 2.0);
  options.nugget = number_or(cfg, "nugget", 1e-8);
  options.multistarts = static_cast<int>(integer_or(cfg, "multistarts", 5));
  options.theta_scaled_min = number_or(cfg, "theta_scaled_min", options.theta_scaled_min);
  options.theta_scaled_max = number_or(cfg, "theta_scaled_max", options.theta_scaled_max);
  const gpsobol::TrendKind trend = [&] {
    const std::string name = cfg.contains("trend") ? string_at(cfg, "trend") : "linear";
    try {
      return gpsobol::trend_from_name(name);
    } catch (const std::invalid_argument& e) {
      throw gpsobol::ConfigError(std::string("fit config: ") + e.what());
    }
  }();

  const gpsobol::FittedGp gp = gpsobol::fit_gp(design, space, trend, options);
  const gpsobol::ValidationReport loo = gpsobol::loo_q2(gp);

  ensure_out_dir(args.out_dir);
  const std::string model_path = args.out_dir + "/model.json";
  gpsobol::save_model(model_path, gp, space);

  json report;
  report["n"] = gp.size();
  report["d"] = gp.dim();
  report["trend"] = gpsobol::trend_name(trend);
  report["theta"] = gpsobol::detail::vector_to_json(gp.params().theta);
  report["p"] = gpsobol::detail::vector_to_json(gp.params().p);
  report["sigma2"] = gp.params().sigma2;
  report["nugget"] = gp.nugget();
  report["log_likelihood"] = gp.log_likelihood();
  report["q2_loo"] = loo.q2;
  report["rmse_loo"] = loo.rmse;
  if (gp.trace() != nullptr) {
    report["multistarts"] = static_cast<int>(gp.trace()->starts.size());
    report["best_start"] = gp.trace()->best_start + 1;
  }
  const std::string report_path = args.out_dir + "/fit_report.json";
  write_json_file(report_path, report);

  print_status({{"status", "ok"},
                {"command", "fit"},
                {"q2_loo", loo.q2},
                {"outputs", {model_path, report_path}}});
  return 0;
}

int cmd_sobol(const CommonArgs& args) {
  const json cfg = load_config(args.config_path);
  gpsobol::detail::require_keys(cfg, {"model"},
                                {"level", "n_dis", "k_sim", "quad_tol"}, "sobol config");
  gpsobol::LoadedModel loaded = gpsobol::load_model(string_at(cfg, "model"));
  const gpsobol::FittedGp& gp = loaded.gp;
  const double level = number_or(cfg, "level", 0.9);
  if (!(level > 0.0 && level < 1.0))
    throw gpsobol::ConfigError("sobol config: level must lie in (0, 1)");
  const double quad_tol = number_or(cfg, "quad_tol", 1e-8);
  if (!(quad_tol > 0.0)) throw gpsobol::ConfigError("sobol config: quad_tol must be positive");
  gpsobol::SimulationConfig sim;
  sim.n_dis = static_cast<int>(integer_or(cfg, "n_dis", 200));
  sim.k_sim = static_cast<int>(integer_or(cfg, "k_sim", 10000));
  sim.validate();

  const gpsobol::RefineResult refined = gpsobol::refine_table(gp, loaded.space, quad_tol);
  if (!refined.converged && !args.allow_nonconverged)
    throw std::runtime_error("kernel integrals did not converge at " +
                             std::to_string(refined.table.n_nodes) + " nodes (worst entry " +
                             refined.worst_entry +
                             "); rerun with --allow-nonconverged to accept the finest table");
  const gpsobol::KernelIntegralTable& table = refined.table;

  const gpsobol::SobolDecomposition dec = gpsobol::decompose(gp, table);
  const auto predictor = gpsobol::sobol_predictor(gp, table);
  const auto global_mean = gpsobol::sobol_global_mean(gp, table);

  std::vector<gpsobol::MainEffectProcess> effects;
  for (int i = 1; i <= gp.dim(); ++i)
    effects.push_back(gpsobol::build_main_effect(gp, loaded.space, table, i, sim.n_dis));
  const auto global_std = gpsobol::sobol_global_std(gp, table, effects);

  bool all_converged = refined.converged;
  json inputs = json::array();
  ensure_out_dir(args.out_dir);
  const std::string csv_path = args.out_dir + "/indices.csv";
  std::ofstream csv(csv_path);
  if (!csv) throw gpsobol::ConfigError("cannot open output file " + csv_path);
  csv << "input,S,mu,sigma,ci_lo,ci_hi\n";

  for (Eigen::Index i = 0; i < gp.dim(); ++i) {
    gpsobol::SimulationConfig sim_i = sim;
    sim_i.seed = gpsobol::mix_seed(args.seed, static_cast<std::uint64_t>(i));
    const gpsobol::IndexDistribution dist =
        gpsobol::simulate_index(effects[static_cast<std::size_t>(i)],
                                dec.global.total_variance, sim_i);
    const gpsobol::ConfidenceInterval ci = dist.confidence_interval(level);

    gpsobol::SimulationConfig check_cfg = sim_i;
    check_cfg.seed = gpsobol::mix_seed(args.seed, 1000 + static_cast<std::uint64_t>(i));
    const gpsobol::EffectConvergenceReport check = gpsobol::convergence_check(
        gp, loaded.space, table, static_cast<int>(i) + 1, dec.global.total_variance, check_cfg);
    all_converged = all_converged && check.converged;

    const double s_value = predictor[static_cast<std::size_t>(i)].value;
    const double mu_value = global_mean[static_cast<std::size_t>(i)].value;
    const double sigma_value = global_std[static_cast<std::size_t>(i)].std_dev.value();
    csv << (i + 1) << ',' << gpsobol::format_full(s_value) << ','
        << gpsobol::format_full(mu_value) << ',' << gpsobol::format_full(sigma_value) << ','
        << gpsobol::format_full(ci.lower) << ',' << gpsobol::format_full(ci.upper) << '\n';

    inputs.push_back({{"input", i + 1},
                      {"S", s_value},
                      {"mu", mu_value},
                      {"mu_grid", global_std[static_cast<std::size_t>(i)].value},
                      {"sigma", sigma_value},
                      {"sim_mean", dist.mean()},
                      {"sim_std", dist.std_dev()},
                      {"ci", {{"level", ci.level}, {"lower", ci.lower}, {"upper", ci.upper}}},
                      {"convergence",
                       {{"n_dis", check.n_dis},
                        {"k_sim", check.k_sim},
                        {"grid_mean_drift", check.grid_mean_drift},
                        {"grid_std_drift", check.grid_std_drift},
                        {"sim_mean_drift", check.sim_mean_drift},
                        {"sim_std_drift", check.sim_std_drift},
                        {"converged", check.converged}}}});
  }
  csv.flush();
  if (!csv) throw gpsobol::ConfigError("write failed for " + csv_path);

  json summary;
  summary["level"] = level;
  summary["denominator_predictor"] = dec.predictor.total_variance;
  summary["denominator_global"] = dec.global.total_variance;
  summary["quadrature"] = {{"n_nodes", table.n_nodes},
                           {"tolerance", quad_tol},
                           {"converged", refined.converged},
                           {"worst_entry", refined.worst_entry},
                           {"worst_ratio", refined.worst_ratio}};
  summary["inputs"] = inputs;
  summary["converged"] = all_converged;
  const std::string json_path = args.out_dir + "/sobol.json";
  write_json_file(json_path, summary);

  print_status({{"status", all_converged ? "ok" : "nonconverged"},
                {"command", "sobol"},
                {"converged", all_converged},
                {"outputs", {csv_path, json_path}}});
  if (!all_converged && !args.allow_nonconverged) return 1;
  return 0;
}

struct BenchPlan {
  std::vector<Eigen::Index> convergence_sizes;
  int convergence_replicates = 0;
  std::vector<Eigen::Index> coverage_sizes;
  int coverage_replicates = 0;
};

BenchPlan bench_plan(const std::string& function, const std::string& profile) {
  BenchPlan plan;
  const bool full = profile == "full";
  if (function == "gsobol") {
    plan.convergence_sizes = full ? std::vector<Eigen::Index>{25, 35, 45, 55, 65, 75, 85, 95}
                                  : std::vector<Eigen::Index>{25, 55, 95};
    plan.convergence_replicates = full ? 100 : 20;
    plan.coverage_sizes = full ? std::vector<Eigen::Index>{20, 26, 32, 38, 44, 50}
                               : std::vector<Eigen::Index>{20, 35, 50};
    plan.coverage_replicates = full ? 17 : 10;
  } else {
    plan.convergence_sizes = full ? std::vector<Eigen::Index>{30, 50, 70, 90, 110, 130}
                                  : std::vector<Eigen::Index>{30, 70, 130};
    plan.convergence_replicates = full ? 100 : 10;
    plan.coverage_sizes = plan.convergence_sizes;
    plan.coverage_replicates = full ? 100 : 10;
  }
  return plan;
}

int cmd_bench(const CommonArgs& args) {
  const json cfg = load_config(args.config_path);
  gpsobol::detail::require_keys(
      cfg, {"function", "profile"},
      {"a", "sizes", "replicates", "coverage_sizes", "coverage_replicates", "level", "n_test",
       "n_dis", "k_sim", "quad_tol"},
      "bench config");
  const std::string function = string_at(cfg, "function");
  const std::string profile = string_at(cfg, "profile");
  if (profile != "ci" && profile != "full")
    throw gpsobol::ConfigError("bench config: profile must be \"ci\" or \"full\"");

  gpsobol::TestFunction fn;
  if (function == "gsobol") {
    if (cfg.contains("a")) {
      fn = gpsobol::gsobol(gpsobol::detail::vector_from_json(cfg.at("a"), "bench a"));
    } else {
      fn = gpsobol::gsobol();
    }
  } else if (function == "ishigami") {
    if (cfg.contains("a")) throw gpsobol::ConfigError("bench config: \"a\" applies to gsobol only");
    fn = gpsobol::ishigami();
  } else {
    throw gpsobol::ConfigError("bench config: unknown function \"" + function + "\"");
  }

  BenchPlan plan = bench_plan(function, profile);
  if (cfg.contains("sizes")) plan.convergence_sizes = sizes_from(cfg, "sizes");
  if (cfg.contains("replicates"))
    plan.convergence_replicates = static_cast<int>(integer_or(cfg, "replicates", 0));
  if (cfg.contains("coverage_sizes")) plan.coverage_sizes = sizes_from(cfg, "coverage_sizes");
  if (cfg.contains("coverage_replicates"))
    plan.coverage_replicates = static_cast<int>(integer_or(cfg, "coverage_replicates", 0));

  const double level = number_or(cfg, "level", 0.9);
  gpsobol::StudyConfig study;
  study.threads = args.threads;
  study.n_test = static_cast<Eigen::Index>(integer_or(cfg, "n_test", 10000));
  study.quad_tol = number_or(cfg, "quad_tol", 1e-8);
  study.sim.n_dis = static_cast<int>(integer_or(cfg, "n_dis", 200));
  study.sim.k_sim = static_cast<int>(integer_or(cfg, "k_sim", 10000));

  study.seed = gpsobol::mix_seed(args.seed, 1);
  const gpsobol::StudyResult convergence =
      gpsobol::convergence_study(fn, plan.convergence_sizes, plan.convergence_replicates, study);
  study.seed = gpsobol::mix_seed(args.seed, 2);
  const gpsobol::StudyResult coverage =
      gpsobol::coverage_study(fn, plan.coverage_sizes, plan.coverage_replicates, level, study);

  ensure_out_dir(args.out_dir);
  const std::string t1 = args.out_dir + "/table1.csv";
  const std::string fc = args.out_dir + "/fig_convergence.csv";
  const std::string fv = args.out_dir + "/fig_coverage.csv";
  const std::string t2 = args.out_dir + "/table2.csv";
  gpsobol::write_table1_csv(t1, convergence);
  gpsobol::write_fig_convergence_csv(fc, convergence);
  gpsobol::write_fig_coverage_csv(fv, coverage);
  gpsobol::write_table2_csv(t2, coverage);

  print_status({{"status", "ok"},
                {"command", "bench"},
                {"function", function},
                {"profile", profile},
                {"outputs", {t1, fc, fv, t2}}});
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gaussian-process metamodel fitting and first-order sensitivity analysis"};
  app.require_subcommand(1);

  CommonArgs args;
  const auto add_common = [&](CLI::App* sub, bool with_allow) {
    sub->add_option("--config", args.config_path, "JSON config file")->required();
    sub->add_option("--out", args.out_dir, "output directory")->required();
    sub->add_option("--seed", args.seed, "base RNG seed (default 0)");
    sub->add_option("--threads", args.threads, "worker threads (default: all cores)");
    if (with_allow)
      sub->add_flag("--allow-nonconverged", args.allow_nonconverged,
                    "accept non-converged quadrature/simulation settings");
  };

  CLI::App* lhs = app.add_subcommand("lhs", "generate a Latin hypercube design CSV");
  CLI::App* fit = app.add_subcommand("fit", "fit a GP model to a design CSV");
  CLI::App* sobol = app.add_subcommand("sobol", "compute sensitivity indices from a model");
  CLI::App* bench = app.add_subcommand("bench", "run benchmark studies with known truth");
  add_common(lhs, false);
  add_common(fit, false);
  add_common(sobol, true);
  add_common(bench, false);

  CLI11_PARSE(app, argc, argv);

  try {
    if (lhs->parsed()) return cmd_lhs(args);
    if (fit->parsed()) return cmd_fit(args);
    if (sobol->parsed()) return cmd_sobol(args);
    return cmd_bench(args);
  } catch (const gpsobol::ConfigError& e) {
    print_status({{"error", {{"type", "config"}, {"message", e.what()}}}});
    return 2;
  } catch (const std::exception& e) {
    print_status({{"error", {{"type", "runtime"}, {"message", e.what()}}}});
    return 1;
  }
}
