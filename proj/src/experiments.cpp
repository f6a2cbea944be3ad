#include "clsim/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

#include "clsim/estimators.hpp"
#include "clsim/oracles.hpp"
#include "clsim/serialization.hpp"

namespace clsim {

namespace {

void parallel_for(std::int64_t n, int threads, const std::function<void(std::int64_t)>& fn) {
  int hw = threads > 0 ? threads : static_cast<int>(std::thread::hardware_concurrency());
  hw = std::max(1, std::min<int>(hw, 16));
  if (hw == 1 || n < 4) {
    for (std::int64_t i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::vector<std::thread> pool;
  std::exception_ptr error;
  std::mutex error_mutex;
  for (int w = 0; w < hw; ++w) {
    pool.emplace_back([&] {
      for (;;) {
        std::int64_t i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

double mean_of(const std::vector<double>& xs) {
  double acc = 0.0;
  for (double x : xs) acc += x;
  return xs.empty() ? 0.0 : acc / static_cast<double>(xs.size());
}

double quantile_of(std::vector<double> xs, double q) {
  if (xs.empty()) return 0.0;
  std::sort(xs.begin(), xs.end());
  double pos = q * (static_cast<double>(xs.size()) - 1.0);
  std::size_t lo = static_cast<std::size_t>(std::floor(pos));
  std::size_t hi = std::min(xs.size() - 1, lo + 1);
  double frac = pos - std::floor(pos);
  return xs[lo] * (1.0 - frac) + xs[hi] * frac;
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

struct RepResult {
  double loss = 0.0;
  std::size_t t_star = 0;
  double precision = 1.0;
  double recall = 1.0;
  bool empty_t_alg = false;
  std::int64_t samples_used = 0;
};

RepResult run_rep(const ProblemInstance& inst, const EliminationConfig& cfg,
                  std::uint64_t seed, double kappa_ref) {
  BudgetedSampler sampler(inst, seed, /*record_history=*/false);
  EliminationTrace trace = cfg.variance_mode == VarianceMode::Known
                               ? run_algorithm1(inst, sampler, cfg)
                               : (cfg.variance_mode == VarianceMode::EstimatedVariance
                                      ? run_algorithm1_unknown_variance(inst, sampler, cfg)
                                      : run_algorithm1_unknown_covariance(inst, sampler, cfg));
  RepResult res;
  res.loss = squared_error(trace.final_estimate, inst.task(0).theta);
  res.t_star = trace.t_star;
  res.samples_used = trace.samples_used;
  if (kappa_ref > 0.0) {
    PrecisionRecall pr = precision_recall(trace.t_alg, weak_oracle_set(inst, kappa_ref));
    res.precision = pr.precision;
    res.recall = pr.recall;
    res.empty_t_alg = pr.empty_retained;
  }
  return res;
}

}  // namespace

PrecisionRecall precision_recall(const std::vector<std::size_t>& retained,
                                 const std::vector<std::size_t>& weak_set) {
  std::vector<std::size_t> inter;
  std::set_intersection(retained.begin(), retained.end(), weak_set.begin(), weak_set.end(),
                        std::back_inserter(inter));
  PrecisionRecall pr;
  pr.empty_retained = retained.empty();
  if (!retained.empty())
    pr.precision = static_cast<double>(inter.size()) / static_cast<double>(retained.size());
  if (!weak_set.empty())
    pr.recall = static_cast<double>(inter.size()) / static_cast<double>(weak_set.size());
  return pr;
}

std::size_t ExperimentReport::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i)
    if (columns[i] == name) return i;
  throw ConfigError("report has no column '" + name + "'");
}

double ExperimentReport::at(std::size_t row, const std::string& name) const {
  return rows.at(row).at(column(name));
}

std::int64_t default_r_bar(std::size_t T, double sigma_bar2, double sigma0_2) {
  double ratio = static_cast<double>(T) * sigma_bar2 / sigma0_2;
  double r = std::ceil(std::log2(std::max(ratio, 1e-300)));
  return std::max<std::int64_t>(1, std::min<std::int64_t>(10, static_cast<std::int64_t>(r)));
}

double harness_c_const(std::size_t dim) {
  static std::mutex mutex;
  static std::map<std::size_t, double> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(dim);
  if (it != cache.end()) return it->second;
  GFunction g = calibrate_g(dim, 1.0, 100, default_delta_grid(), 20000, 0xC0FFEEULL);
  cache[dim] = g.c_const;
  return g.c_const;
}

EliminationConfig make_elimination_config(const HarnessConfig& h, std::size_t T,
                                          double sigma_bar2, double sigma0_2, std::size_t dim) {
  EliminationConfig cfg;
  cfg.delta = h.delta;
  cfg.r_bar = h.r_bar > 0 ? h.r_bar : default_r_bar(T, sigma_bar2, sigma0_2);
  cfg.g.c_const = h.c_const > 0 ? h.c_const : harness_c_const(dim);
  cfg.variance_mode = h.variance_mode;
  return cfg;
}

ProblemInstance two_source_instance(double q2_tilde, const TwoSourceSweepParams& p) {
  const double unit = static_cast<double>(p.dim) * p.sigma0_2 / static_cast<double>(p.n_budget);
  Vec zero = Vec::Zero(static_cast<Eigen::Index>(p.dim));
  Vec far = zero;
  far[0] = std::sqrt(q2_tilde * unit);
  const double c_theta = 2.0 * std::max(1.0, far.norm());
  return build_instance({zero, zero, far}, {p.sigma0_2, p.sigma2, p.sigma2}, p.n_budget, c_theta);
}

ProblemInstance mixture_instance(std::int64_t t_far, std::int64_t t_close,
                                 const TypeMixtureParams& p) {
  const std::int64_t t_med = static_cast<std::int64_t>(p.T) - t_far - t_close;
  if (t_far < 0 || t_close < 0 || t_med < 0)
    throw InfeasibleMixture("mixture (" + std::to_string(t_far) + "," + std::to_string(t_close) +
                            ") leaves negative T_med");
  const double unit = static_cast<double>(p.dim) * p.sigma0_2 / static_cast<double>(p.n_budget);
  Vec zero = Vec::Zero(static_cast<Eigen::Index>(p.dim));
  auto at_q2 = [&](double q2t) {
    Vec v = zero;
    v[0] = std::sqrt(q2t * unit);
    return v;
  };
  std::vector<Vec> thetas{zero};
  std::vector<double> sigma2s{p.sigma0_2};
  for (std::int64_t i = 0; i < t_close; ++i) thetas.push_back(at_q2(p.q2_tilde_close));
  for (std::int64_t i = 0; i < t_med; ++i) thetas.push_back(at_q2(p.q2_tilde_medium));
  for (std::int64_t i = 0; i < t_far; ++i) thetas.push_back(at_q2(p.q2_tilde_far));
  sigma2s.insert(sigma2s.end(), p.T, p.sigma2);
  const double c_theta = 2.0 * std::max(1.0, at_q2(p.q2_tilde_far).norm());
  return build_instance(thetas, sigma2s, p.n_budget, c_theta);
}

ProblemInstance gamma_instance(double gamma, const GammaParams& p) {
  const double unit = static_cast<double>(p.dim) * p.sigma0_2 / static_cast<double>(p.n_budget);
  Vec zero = Vec::Zero(static_cast<Eigen::Index>(p.dim));
  std::vector<Vec> thetas{zero};
  std::vector<double> sigma2s{p.sigma0_2};
  double max_norm = 1.0;
  for (std::size_t t = 1; t <= p.T; ++t) {
    double q2_tilde = t <= 10 ? 0.0 : std::pow(static_cast<double>(t - 10), gamma);
    Vec v = zero;
    v[0] = std::sqrt(q2_tilde * unit);
    max_norm = std::max(max_norm, v.norm());
    thetas.push_back(std::move(v));
    sigma2s.push_back(p.sigma2);
  }
  return build_instance(thetas, sigma2s, p.n_budget, 2.0 * max_norm);
}

ExperimentReport exp_two_source_sweep(const HarnessConfig& h, const TwoSourceSweepParams& p) {
  if (h.reps < 1) throw ConfigError("reps must be >= 1");
  ExperimentReport report;
  report.name = "two-source-sweep";
  report.columns = {"cell",         "q2_tilde",     "mean_loss",    "loss_p10",
                    "loss_p50",     "loss_p90",     "choose_task0", "choose_task1",
                    "choose_task2", "mean_samples_used"};
  for (std::size_t cell = 0; cell < p.q2_tilde_grid.size(); ++cell) {
    const double q2_tilde = p.q2_tilde_grid[cell];
    ProblemInstance inst = two_source_instance(q2_tilde, p);
    EliminationConfig cfg = make_elimination_config(h, 2, p.sigma2, p.sigma0_2, p.dim);
    std::vector<RepResult> results(static_cast<std::size_t>(h.reps));
    const std::uint64_t cell_seed = mix_seed(h.master_seed, cell);
    parallel_for(h.reps, h.threads, [&](std::int64_t rep) {
      results[static_cast<std::size_t>(rep)] =
          run_rep(inst, cfg, cell_seed + static_cast<std::uint64_t>(rep), 0.0);
    });
    std::vector<double> losses, samples;
    double choose[3] = {0, 0, 0};
    for (const RepResult& r : results) {
      losses.push_back(r.loss);
      samples.push_back(static_cast<double>(r.samples_used));
      if (r.t_star < 3) choose[r.t_star] += 1.0;
    }
    const double reps = static_cast<double>(h.reps);
    report.rows.push_back({static_cast<double>(cell), q2_tilde, mean_of(losses),
                           quantile_of(losses, 0.10), quantile_of(losses, 0.50),
                           quantile_of(losses, 0.90), choose[0] / reps, choose[1] / reps,
                           choose[2] / reps, mean_of(samples)});
  }
  return report;
}

ExperimentReport exp_type_mixture(const HarnessConfig& h, const TypeMixtureParams& p) {
  if (h.reps < 1) throw ConfigError("reps must be >= 1");
  ExperimentReport report;
  report.name = "type-mixture";
  report.columns = {"cell",     "t_far",    "t_close",  "t_med",
                    "mean_loss", "loss_p10", "loss_p50", "loss_p90",
                    "mean_samples_used"};
  std::size_t cell = 0;
  for (std::int64_t t_far : p.grid_values) {
    for (std::int64_t t_close : p.grid_values) {
      const std::int64_t t_med = static_cast<std::int64_t>(p.T) - t_far - t_close;
      if (t_med < 0) continue;  // outside the simplex, not part of the grid
      ProblemInstance inst = mixture_instance(t_far, t_close, p);
      EliminationConfig cfg = make_elimination_config(h, p.T, p.sigma2, p.sigma0_2, p.dim);
      std::vector<RepResult> results(static_cast<std::size_t>(h.reps));
      const std::uint64_t cell_seed = mix_seed(h.master_seed, cell);
      parallel_for(h.reps, h.threads, [&](std::int64_t rep) {
        results[static_cast<std::size_t>(rep)] =
            run_rep(inst, cfg, cell_seed + static_cast<std::uint64_t>(rep), 0.0);
      });
      std::vector<double> losses, samples;
      for (const RepResult& r : results) {
        losses.push_back(r.loss);
        samples.push_back(static_cast<double>(r.samples_used));
      }
      report.rows.push_back({static_cast<double>(cell), static_cast<double>(t_far),
                             static_cast<double>(t_close), static_cast<double>(t_med),
                             mean_of(losses), quantile_of(losses, 0.10),
                             quantile_of(losses, 0.50), quantile_of(losses, 0.90),
                             mean_of(samples)});
      ++cell;
    }
  }
  return report;
}

ExperimentReport exp_gamma_precision_recall(const HarnessConfig& h, const GammaParams& p,
                                            std::vector<CurveSpec>* curves) {
  if (h.reps < 1) throw ConfigError("reps must be >= 1");
  const double kappa_ref = h.kappa > 0 ? h.kappa : 1.0;
  ExperimentReport report;
  report.name = "gamma-pr";
  report.columns = {"cell",        "gamma",      "mean_precision", "min_recall",
                    "mean_recall", "mean_loss",  "empty_t_alg",    "mean_samples_used"};
  if (curves) curves->clear();
  for (std::size_t cell = 0; cell < p.gammas.size(); ++cell) {
    const double gamma = p.gammas[cell];
    ProblemInstance inst = gamma_instance(gamma, p);
    EliminationConfig cfg = make_elimination_config(h, p.T, p.sigma2, p.sigma0_2, p.dim);
    if (curves) {
      const double delta_bar =
          cfg.delta / (static_cast<double>(p.T) * static_cast<double>(cfg.r_bar) + 2.0);
      curves->push_back(curve_from_instance(inst, cfg.g(delta_bar) / cfg.nu));
    }
    std::vector<RepResult> results(static_cast<std::size_t>(h.reps));
    const std::uint64_t cell_seed = mix_seed(h.master_seed, cell);
    parallel_for(h.reps, h.threads, [&](std::int64_t rep) {
      results[static_cast<std::size_t>(rep)] =
          run_rep(inst, cfg, cell_seed + static_cast<std::uint64_t>(rep), kappa_ref);
    });
    std::vector<double> precisions, recalls, losses, samples;
    double empty_count = 0.0;
    for (const RepResult& r : results) {
      precisions.push_back(r.precision);
      recalls.push_back(r.recall);
      losses.push_back(r.loss);
      samples.push_back(static_cast<double>(r.samples_used));
      if (r.empty_t_alg) empty_count += 1.0;
    }
    report.rows.push_back({static_cast<double>(cell), gamma, mean_of(precisions),
                           *std::min_element(recalls.begin(), recalls.end()),
                           mean_of(recalls), mean_of(losses), empty_count, mean_of(samples)});
  }
  return report;
}

ExperimentReport curve_report(const CurveSpec& curve) {
  ExperimentReport report;
  report.name = "curve-export";
  report.columns = {"tau", "beta"};
  for (double tau : curve_grid(curve)) report.rows.push_back({tau, beta(curve, tau)});
  return report;
}

std::string csv_string(const ExperimentReport& report) {
  std::ostringstream out;
  for (std::size_t i = 0; i < report.columns.size(); ++i) {
    if (i) out << ',';
    out << report.columns[i];
  }
  out << '\n';
  for (const auto& row : report.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out << ',';
      out << format_double(row[i]);
    }
    out << '\n';
  }
  return out.str();
}

void write_csv(const ExperimentReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot open output file: " + path);
  out << csv_string(report);
}

}  // namespace clsim
