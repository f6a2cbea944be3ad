#include <CLI11.hpp>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>

#include "clsim/experiments.hpp"
#include "clsim/lower_bounds.hpp"
#include "clsim/serialization.hpp"
#include "clsim/single_source.hpp"

namespace clsim {

namespace {

Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  Json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError("invalid JSON in " + path + ": " + e.what());
  }
  return j;
}

VarianceMode parse_variance_mode(const std::string& name) {
  if (name == "known") return VarianceMode::Known;
  if (name == "estimated") return VarianceMode::EstimatedVariance;
  if (name == "trace") return VarianceMode::EstimatedTrace;
  throw ConfigError("unknown variance mode: " + name);
}

struct CommonCli {
  std::string config_path;
  std::string out_base;
  HarnessConfig harness;
  std::string variance_mode_name = "known";

  void attach(CLI::App* cmd, bool need_out) {
    cmd->add_option("--config", config_path, "JSON config file");
    auto* out = cmd->add_option("--out", out_base, "output base path (writes <out>.csv and <out>.meta.json)");
    if (need_out) out->required();
    cmd->add_option("--seed", harness.master_seed, "master seed");
    cmd->add_option("--reps", harness.reps, "repetitions per cell");
    cmd->add_option("--rounds", harness.r_bar, "elimination rounds r_bar (0 = heuristic)");
    cmd->add_option("--delta", harness.delta, "reliability level delta");
    cmd->add_option("--kappa", harness.kappa, "weak-oracle reference kappa (0 = default)");
    cmd->add_option("--c-const", harness.c_const, "g-function constant c (0 = calibrated)");
    cmd->add_option("--threads", harness.threads, "worker threads (0 = hardware)");
    cmd->add_option("--variance-mode", variance_mode_name, "known|estimated|trace")
        ->check(CLI::IsMember({"known", "estimated", "trace"}));
  }

  // Config file first, then explicit flags override.
  Json finalize(CLI::App* cmd) {
    Json params;
    if (!config_path.empty()) {
      Json j = load_json_file(config_path);
      if (j.contains("reps") && !cmd->count("--reps")) harness.reps = j["reps"].get<std::int64_t>();
      if (j.contains("seed") && !cmd->count("--seed"))
        harness.master_seed = j["seed"].get<std::uint64_t>();
      if (j.contains("delta") && !cmd->count("--delta")) harness.delta = j["delta"].get<double>();
      if (j.contains("rounds") && !cmd->count("--rounds"))
        harness.r_bar = j["rounds"].get<std::int64_t>();
      if (j.contains("kappa") && !cmd->count("--kappa")) harness.kappa = j["kappa"].get<double>();
      if (j.contains("c_const") && !cmd->count("--c-const"))
        harness.c_const = j["c_const"].get<double>();
      if (j.contains("variance_mode") && !cmd->count("--variance-mode"))
        variance_mode_name = j["variance_mode"].get<std::string>();
      if (j.contains("out") && out_base.empty()) out_base = j["out"].get<std::string>();
      if (j.contains("params")) params = j["params"];
    }
    harness.variance_mode = parse_variance_mode(variance_mode_name);
    return params;
  }
};

double param_or(const Json& params, const char* key, double fallback) {
  return params.contains(key) ? params[key].get<double>() : fallback;
}

std::int64_t param_or_i(const Json& params, const char* key, std::int64_t fallback) {
  return params.contains(key) ? params[key].get<std::int64_t>() : fallback;
}

ProblemInstance two_source_default_single_instance() {
  Vec zero = Vec::Zero(2);
  return build_instance({zero, zero}, {10.0, 1.0}, 1000, 10.0);
}

CurveSpec reference_profile_curve(double scale_denominator) {
  std::vector<double> q2s, s2s;
  for (std::size_t t = 1; t <= 1000; ++t) {
    // Snap perfect cubes so the t = 729 boundary is exact.
    double r = std::cbrt(static_cast<double>(t));
    double rr = std::round(r);
    if (rr * rr * rr == static_cast<double>(t)) r = rr;
    q2s.push_back(r / scale_denominator);
    s2s.push_back(1.0);
  }
  return make_curve_spec(std::move(q2s), std::move(s2s), /*sigma0_2=*/200.0, /*n_budget=*/1000,
                         /*dim=*/1, /*g_over_nu=*/1.0);
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

int finish(const ExperimentReport& report, const CommonCli& cli, const Json& params,
           std::chrono::steady_clock::time_point start) {
  write_csv(report, cli.out_base + ".csv");
  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  Json meta{{"name", report.name},
            {"seed", cli.harness.master_seed},
            {"reps", cli.harness.reps},
            {"delta", cli.harness.delta},
            {"config_hash", fnv1a(report.name + "|" + params.dump() + "|" +
                                  std::to_string(cli.harness.master_seed) + "|" +
                                  std::to_string(cli.harness.reps))},
            {"params", params},
            {"wall_time_sec", wall}};
  std::ofstream out(cli.out_base + ".meta.json", std::ios::binary);
  if (!out) throw ConfigError("cannot open output file: " + cli.out_base + ".meta.json");
  out << meta.dump(2) << '\n';
  std::cout << report.name << ": " << report.rows.size() << " rows -> " << cli.out_base
            << ".csv (" << wall << " s)\n";
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args) {
  CLI::App app{"Curriculum-learning source-elimination simulator"};
  app.require_subcommand(1);

  CommonCli sweep_cli, mixture_cli, gamma_cli, curve_cli, bounds_cli, single_cli, alg_cli;
  std::string curve_instance_path, bounds_instance_path, single_instance_path, alg_instance_path;
  double curve_g_over_nu = 1.0;

  auto* sweep = app.add_subcommand("two-source-sweep", "T=2 distance sweep");
  sweep_cli.attach(sweep, true);

  auto* mixture = app.add_subcommand("type-mixture", "close/medium/far mixture grid");
  mixture_cli.attach(mixture, true);

  auto* gamma = app.add_subcommand("gamma-pr", "precision/recall over distance profiles");
  gamma_cli.attach(gamma, true);

  auto* curve = app.add_subcommand("curve-export", "elimination curve jump points");
  curve_cli.attach(curve, true);
  curve->add_option("--instance", curve_instance_path, "instance JSON file");
  curve->add_option("--g-over-nu", curve_g_over_nu, "barrier factor g(delta_bar)/nu");

  auto* bounds = app.add_subcommand("bound-report", "oracle benchmarks and minimax lower bounds");
  bounds_cli.attach(bounds, false);
  bounds->add_option("--instance", bounds_instance_path, "instance JSON file")->required();

  auto* single = app.add_subcommand("single-source", "T=1 elimination method");
  single_cli.attach(single, true);
  single->add_option("--instance", single_instance_path, "instance JSON file");

  auto* alg = app.add_subcommand("algorithm1", "multi-round elimination on an instance");
  alg_cli.attach(alg, true);
  alg->add_option("--instance", alg_instance_path, "instance JSON file")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {  // --help
      app.exit(e);
      return 0;
    }
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }

  const auto start = std::chrono::steady_clock::now();
  try {
    if (sweep->parsed()) {
      Json params = sweep_cli.finalize(sweep);
      TwoSourceSweepParams p;
      if (params.contains("grid")) p.q2_tilde_grid = params["grid"].get<std::vector<double>>();
      p.n_budget = param_or_i(params, "n_budget", p.n_budget);
      p.dim = static_cast<std::size_t>(param_or_i(params, "dim", static_cast<std::int64_t>(p.dim)));
      p.sigma2 = param_or(params, "sigma2", p.sigma2);
      p.sigma0_2 = param_or(params, "sigma0_2", p.sigma0_2);
      return finish(exp_two_source_sweep(sweep_cli.harness, p), sweep_cli, params, start);
    }
    if (mixture->parsed()) {
      Json params = mixture_cli.finalize(mixture);
      TypeMixtureParams p;
      if (params.contains("grid_values"))
        p.grid_values = params["grid_values"].get<std::vector<std::int64_t>>();
      p.T = static_cast<std::size_t>(param_or_i(params, "T", static_cast<std::int64_t>(p.T)));
      p.n_budget = param_or_i(params, "n_budget", p.n_budget);
      p.dim = static_cast<std::size_t>(param_or_i(params, "dim", static_cast<std::int64_t>(p.dim)));
      p.sigma2 = param_or(params, "sigma2", p.sigma2);
      p.sigma0_2 = param_or(params, "sigma0_2", p.sigma0_2);
      p.q2_tilde_close = param_or(params, "q2_tilde_close", p.q2_tilde_close);
      p.q2_tilde_medium = param_or(params, "q2_tilde_medium", p.q2_tilde_medium);
      p.q2_tilde_far = param_or(params, "q2_tilde_far", p.q2_tilde_far);
      return finish(exp_type_mixture(mixture_cli.harness, p), mixture_cli, params, start);
    }
    if (gamma->parsed()) {
      Json params = gamma_cli.finalize(gamma);
      GammaParams p;
      if (params.contains("gammas")) p.gammas = params["gammas"].get<std::vector<double>>();
      p.T = static_cast<std::size_t>(param_or_i(params, "T", static_cast<std::int64_t>(p.T)));
      p.n_budget = param_or_i(params, "n_budget", p.n_budget);
      p.dim = static_cast<std::size_t>(param_or_i(params, "dim", static_cast<std::int64_t>(p.dim)));
      p.sigma2 = param_or(params, "sigma2", p.sigma2);
      p.sigma0_2 = param_or(params, "sigma0_2", p.sigma0_2);
      std::vector<CurveSpec> curves;
      ExperimentReport report = exp_gamma_precision_recall(gamma_cli.harness, p, &curves);
      for (std::size_t i = 0; i < curves.size(); ++i) {
        std::ostringstream name;
        name << gamma_cli.out_base << ".curve.gamma" << p.gammas[i] << ".csv";
        write_csv(curve_report(curves[i]), name.str());
      }
      return finish(report, gamma_cli, params, start);
    }
    if (curve->parsed()) {
      Json params = curve_cli.finalize(curve);
      CurveSpec spec = reference_profile_curve(param_or(params, "profile_denom", 9.0));
      if (!curve_instance_path.empty()) {
        spec = curve_from_instance(load_instance(curve_instance_path), curve_g_over_nu);
      } else if (params.contains("q2s")) {
        spec = make_curve_spec(params["q2s"].get<std::vector<double>>(),
                               params["sigma2s"].get<std::vector<double>>(),
                               param_or(params, "sigma0_2", 1.0),
                               param_or_i(params, "n_budget", 1000),
                               static_cast<std::size_t>(param_or_i(params, "dim", 1)),
                               param_or(params, "g_over_nu", 1.0));
      }
      return finish(curve_report(spec), curve_cli, params, start);
    }
    if (bounds->parsed()) {
      Json params = bounds_cli.finalize(bounds);
      ProblemInstance inst = load_instance(bounds_instance_path);
      Json j = bound_report_to_json(make_bound_report(inst));
      std::cout << j.dump(2) << '\n';
      if (!bounds_cli.out_base.empty()) {
        std::ofstream out(bounds_cli.out_base + ".json", std::ios::binary);
        if (!out) throw ConfigError("cannot open output file: " + bounds_cli.out_base + ".json");
        out << j.dump(2) << '\n';
      }
      return 0;
    }
    if (single->parsed()) {
      Json params = single_cli.finalize(single);
      ProblemInstance inst = single_instance_path.empty()
                                 ? two_source_default_single_instance()
                                 : load_instance(single_instance_path);
      GFunction g{single_cli.harness.c_const > 0 ? single_cli.harness.c_const
                                                 : harness_c_const(inst.dim())};
      ExperimentReport report;
      report.name = "single-source";
      report.columns = {"rep", "loss", "chose_source", "stat", "threshold"};
      for (std::int64_t rep = 0; rep < single_cli.harness.reps; ++rep) {
        BudgetedSampler sampler(inst, single_cli.harness.master_seed + static_cast<std::uint64_t>(rep));
        SingleSourceOutcome out = run_single_source(inst, sampler, single_cli.harness.delta, g);
        report.rows.push_back({static_cast<double>(rep),
                               squared_error(out.estimate, inst.task(0).theta),
                               out.chose_source ? 1.0 : 0.0, out.stat, out.threshold});
      }
      return finish(report, single_cli, params, start);
    }
    if (alg->parsed()) {
      Json params = alg_cli.finalize(alg);
      ProblemInstance inst = load_instance(alg_instance_path);
      double sigma_bar2 = 0.0;
      for (std::size_t t = 1; t <= inst.num_sources(); ++t) sigma_bar2 += inst.sigma2(t);
      sigma_bar2 /= static_cast<double>(inst.num_sources());
      EliminationConfig cfg = make_elimination_config(alg_cli.harness, inst.num_sources(),
                                                      sigma_bar2, inst.sigma2(0), inst.dim());
      ExperimentReport report;
      report.name = "algorithm1";
      report.columns = {"rep", "loss", "t_star", "rounds", "retained", "samples_used"};
      for (std::int64_t rep = 0; rep < alg_cli.harness.reps; ++rep) {
        BudgetedSampler sampler(inst, alg_cli.harness.master_seed + static_cast<std::uint64_t>(rep),
                                /*record_history=*/false);
        EliminationTrace trace =
            cfg.variance_mode == VarianceMode::Known
                ? run_algorithm1(inst, sampler, cfg)
                : (cfg.variance_mode == VarianceMode::EstimatedVariance
                       ? run_algorithm1_unknown_variance(inst, sampler, cfg)
                       : run_algorithm1_unknown_covariance(inst, sampler, cfg));
        if (rep == 0) {
          std::ofstream out(alg_cli.out_base + ".trace.json", std::ios::binary);
          out << trace_to_json(trace).dump(2) << '\n';
        }
        report.rows.push_back({static_cast<double>(rep),
                               squared_error(trace.final_estimate, inst.task(0).theta),
                               static_cast<double>(trace.t_star),
                               static_cast<double>(trace.rounds.size()),
                               static_cast<double>(trace.t_alg.size()),
                               static_cast<double>(trace.samples_used)});
      }
      return finish(report, alg_cli, params, start);
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const Json::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "runtime error: " << e.what() << '\n';
    return 3;
  }
  return 2;
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args);
}

}  // namespace clsim
