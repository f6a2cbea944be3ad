#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "clsim/elimination_curve.hpp"
#include "clsim/models.hpp"
#include "clsim/multi_source.hpp"

namespace clsim {

// Shared harness knobs. Zero-valued r_bar / c_const select the defaults
// (round heuristic, Monte-Carlo calibrated constant).
struct HarnessConfig {
  std::int64_t reps = 200;
  std::uint64_t master_seed = 1;
  double delta = 0.05;
  std::int64_t r_bar = 0;
  double kappa = 0.0;  // 0 = subcommand default
  double c_const = 0.0;
  VarianceMode variance_mode = VarianceMode::Known;
  int threads = 0;  // 0 = hardware concurrency
};

// Tabular result: one row per cell, statistics as columns.
struct ExperimentReport {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  std::string name;

  std::size_t column(const std::string& name) const;
  double at(std::size_t row, const std::string& name) const;
};

struct TwoSourceSweepParams {
  std::vector<double> q2_tilde_grid = {0.0, 1.0, 5.0,   10.0,  25.0,  40.0,
                                       49.0, 100.0, 150.0, 200.0, 250.0, 300.0};
  std::int64_t n_budget = 1000;
  std::size_t dim = 2;
  double sigma2 = 1.0;
  double sigma0_2 = 10.0;
};

struct TypeMixtureParams {
  std::vector<std::int64_t> grid_values = {0, 20, 40, 50, 80, 100};
  std::size_t T = 100;
  std::int64_t n_budget = 100000;
  std::size_t dim = 2;
  double sigma2 = 0.1;
  double sigma0_2 = 1.0;
  double q2_tilde_close = 0.0;
  double q2_tilde_medium = 10.0;
  double q2_tilde_far = 2e4;
};

struct GammaParams {
  std::vector<double> gammas = {0.5, 1.0, 1.5, 2.0};
  std::size_t T = 100;
  std::int64_t n_budget = 100000;
  std::size_t dim = 2;
  double sigma2 = 0.1;
  double sigma0_2 = 1.0;
};

// Overlap of the retained set with the weak-oracle reference set. Both
// ratios default to 1.0 on an empty denominator; an empty retained set is
// flagged so reports can surface the convention.
struct PrecisionRecall {
  double precision = 1.0;
  double recall = 1.0;
  bool empty_retained = false;
};

PrecisionRecall precision_recall(const std::vector<std::size_t>& retained,
                                 const std::vector<std::size_t>& weak_set);

// Default round count: ceil(log2(T sigma_bar^2 / sigma0^2)) clamped to [1, 10].
std::int64_t default_r_bar(std::size_t T, double sigma_bar2, double sigma0_2);

// Calibrated g-constant for the harness (cached per dimension).
double harness_c_const(std::size_t dim);

EliminationConfig make_elimination_config(const HarnessConfig& h, std::size_t T,
                                          double sigma_bar2, double sigma0_2, std::size_t dim);

ProblemInstance two_source_instance(double q2_tilde, const TwoSourceSweepParams& p);
ProblemInstance mixture_instance(std::int64_t t_far, std::int64_t t_close,
                                 const TypeMixtureParams& p);
ProblemInstance gamma_instance(double gamma, const GammaParams& p);

ExperimentReport exp_two_source_sweep(const HarnessConfig& h, const TwoSourceSweepParams& p);
ExperimentReport exp_type_mixture(const HarnessConfig& h, const TypeMixtureParams& p);
ExperimentReport exp_gamma_precision_recall(const HarnessConfig& h, const GammaParams& p,
                                            std::vector<CurveSpec>* curves = nullptr);

// Curve table (tau, beta(tau)) at all jump points, descending work left to
// the caller; header "tau,beta".
ExperimentReport curve_report(const CurveSpec& curve);

void write_csv(const ExperimentReport& report, const std::string& path);
std::string csv_string(const ExperimentReport& report);

// Full CLI: parses argv, runs the subcommand, writes <out>.csv and
// <out>.meta.json. Exit codes: 0 ok, 2 config error, 3 runtime error.
int run_cli(const std::vector<std::string>& args);
int run_cli(int argc, char** argv);

}  // namespace clsim
