#pragma once

#include <cstdint>
#include <vector>

#include "clsim/estimators.hpp"
#include "clsim/models.hpp"

namespace clsim {

// Benchmark-learner summary for one instance: the best single task t*,
// the strong/weak oracle sets at level kappa, and the weak oracle's
// pessimistic task choice.
struct OracleReport {
  std::size_t t_star = 0;
  std::vector<std::size_t> strong_set;
  std::vector<std::size_t> weak_set;
  double strong_bound = 0.0;  // min_t d sigma_t^2/N + Q_t^2
  std::size_t weak_choice = 0;
  double kappa = 1.0;
};

// Per-task benchmark value d sigma_t^2 / N + Q_t^2 (t in [[T]]).
double task_benchmark(const ProblemInstance& inst, std::size_t t);

// Lowest index attaining min_t { d sigma_t^2/N + Q_t^2 } over t in [[T]].
std::size_t strong_oracle_index(const ProblemInstance& inst);

// { t in [[T]] : Q_t^2 + d sigma_t^2/N <= kappa * benchmark(t*) }, kappa >= 1.
std::vector<std::size_t> strong_oracle_set(const ProblemInstance& inst, double kappa);

// { t in [T] : Q_t^2 <= kappa * d sigma_0^2 / N }, kappa > 0.
std::vector<std::size_t> weak_oracle_set(const ProblemInstance& inst, double kappa);

// Pessimistic selection rule t_bar: 0 on the empty set, otherwise the
// maximal-Q_t^2 member of argmin sigma_t^2 (ties on both -> lowest index).
std::size_t select_t_bar(const ProblemInstance& inst, const std::vector<std::size_t>& tau_set);

// Weak-oracle loss benchmark d sigma^2/N + Q^2 evaluated at t_bar(T_w.o.(kappa)).
double weak_oracle_bound(const ProblemInstance& inst, double kappa);

OracleReport make_oracle_report(const ProblemInstance& inst, double kappa);

// The weak-oracle learner: spends the whole budget N on t_bar(T_w.o.(kappa)).
std::pair<Vec, OracleReport> run_weak_oracle(const ProblemInstance& inst,
                                             BudgetedSampler& sampler, double kappa);

}  // namespace clsim
