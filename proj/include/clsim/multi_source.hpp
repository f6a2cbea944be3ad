#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

#include "clsim/estimators.hpp"
#include "clsim/models.hpp"

namespace clsim {

enum class VarianceMode { Known, EstimatedVariance, EstimatedTrace };

enum class StopReason { SmallRetained, AllEliminated, NoProgress, MaxRounds };

// How the final task is picked from the retained set. The pessimistic
// benchmark rule t_bar breaks variance ties by the true maximal Q_t^2,
// which an algorithm cannot evaluate; runs therefore default to a seeded
// uniform choice among the variance minimizers.
enum class FinalPick { UniformMinVariance, PessimisticTrueDistance };

struct EliminationConfig {
  std::int64_t r_bar = 1;
  double delta = 0.05;
  double nu = 1.0 / 27.0;
  GFunction g;
  VarianceMode variance_mode = VarianceMode::Known;
  FinalPick final_pick = FinalPick::UniformMinVariance;

  void validate() const;
};

struct RoundRecord {
  std::vector<std::size_t> retained_before;
  std::map<std::size_t, std::int64_t> allocations;
  std::map<std::size_t, double> stats;  // ||theta0_hat - theta_t_hat||^2
  double threshold = 0.0;
  std::vector<std::size_t> eliminated;
  std::optional<StopReason> stop_reason;
};

struct EliminationTrace {
  std::vector<RoundRecord> rounds;
  std::vector<std::size_t> t_alg;
  std::size_t t_star = 0;
  Vec final_estimate;
  std::int64_t samples_used = 0;
  std::int64_t n_bar = 0;
  double delta_bar = 0.0;
  std::vector<double> sigma2_hat;  // populated in estimated modes
};

// Integer sample split for one round: largest-remainder rounding of
// (n_bar/|retained|) * sigma_t^2 / sigma_bar^2, each share >= 1, summing
// exactly to n_bar.
std::map<std::size_t, std::int64_t> allocate_round(const std::vector<std::size_t>& retained,
                                                   const std::map<std::size_t, double>& sigma2s,
                                                   std::int64_t n_bar);

// 10 g(delta_bar) max( d sigma_bar^2 |retained| / n_bar , d sigma0^2 / n_bar ).
double elimination_threshold(const std::vector<std::size_t>& retained,
                             const std::map<std::size_t, double>& sigma2s, double sigma0_2,
                             std::int64_t n_bar, double delta_bar, const GFunction& g,
                             std::size_t dim);

// Stopping rule, checked after a round's eliminations. The retained-size
// test deliberately uses the pre-elimination set.
std::optional<StopReason> stop_check(const std::vector<std::size_t>& retained_before,
                                     const std::vector<std::size_t>& retained_after,
                                     const std::map<std::size_t, double>& sigma2s,
                                     double sigma0_2);

// Multi-round elimination with known variances.
EliminationTrace run_algorithm1(const ProblemInstance& inst, BudgetedSampler& sampler,
                                const EliminationConfig& config);

// Plug-in variants: a preliminary estimation round feeds variance_hat /
// trace_hat, and the estimates replace the true values everywhere.
EliminationTrace run_algorithm1_unknown_variance(const ProblemInstance& inst,
                                                 BudgetedSampler& sampler,
                                                 const EliminationConfig& config);

EliminationTrace run_algorithm1_unknown_covariance(const ProblemInstance& inst,
                                                   BudgetedSampler& sampler,
                                                   const EliminationConfig& config);

// Reliability level delta* from the multi-source expected-loss statement,
// clamped to (0, 1/2].
double delta_star_multi(const ProblemInstance& inst);

}  // namespace clsim
