#include "clsim/oracles.hpp"

#include <algorithm>
#include <limits>
#include <string>

namespace clsim {

double task_benchmark(const ProblemInstance& inst, std::size_t t) {
  const double d = static_cast<double>(inst.dim());
  const double n = static_cast<double>(inst.n_budget());
  return d * inst.sigma2(t) / n + inst.q2(t);
}

std::size_t strong_oracle_index(const ProblemInstance& inst) {
  std::size_t best = 0;
  double best_val = task_benchmark(inst, 0);
  for (std::size_t t = 1; t <= inst.num_sources(); ++t) {
    double v = task_benchmark(inst, t);
    if (v < best_val) {
      best = t;
      best_val = v;
    }
  }
  return best;
}

std::vector<std::size_t> strong_oracle_set(const ProblemInstance& inst, double kappa) {
  if (kappa < 1.0) throw KappaBelowOne("strong_oracle_set needs kappa >= 1");
  const double cutoff = kappa * task_benchmark(inst, strong_oracle_index(inst));
  std::vector<std::size_t> out;
  for (std::size_t t = 0; t <= inst.num_sources(); ++t)
    if (task_benchmark(inst, t) <= cutoff) out.push_back(t);
  return out;
}

std::vector<std::size_t> weak_oracle_set(const ProblemInstance& inst, double kappa) {
  if (kappa <= 0.0) throw ConfigError("weak_oracle_set needs kappa > 0");
  const double cutoff =
      kappa * static_cast<double>(inst.dim()) * inst.sigma2(0) / static_cast<double>(inst.n_budget());
  std::vector<std::size_t> out;
  for (std::size_t t = 1; t <= inst.num_sources(); ++t)
    if (inst.q2(t) <= cutoff) out.push_back(t);
  return out;
}

std::size_t select_t_bar(const ProblemInstance& inst, const std::vector<std::size_t>& tau_set) {
  if (tau_set.empty()) return 0;
  std::vector<std::size_t> ordered(tau_set);
  std::sort(ordered.begin(), ordered.end());
  std::size_t best = 0;
  double best_sigma2 = std::numeric_limits<double>::infinity();
  double best_q2 = -1.0;
  for (std::size_t t : ordered) {
    if (t == 0 || t > inst.num_sources())
      throw DimensionMismatch("select_t_bar: index out of [T]: " + std::to_string(t));
    const double s2 = inst.sigma2(t);
    const double q2 = inst.q2(t);
    if (s2 < best_sigma2 || (s2 == best_sigma2 && q2 > best_q2)) {
      best = t;
      best_sigma2 = s2;
      best_q2 = q2;
    }
  }
  return best;
}

double weak_oracle_bound(const ProblemInstance& inst, double kappa) {
  return task_benchmark(inst, select_t_bar(inst, weak_oracle_set(inst, kappa)));
}

OracleReport make_oracle_report(const ProblemInstance& inst, double kappa) {
  OracleReport rep;
  rep.kappa = kappa;
  rep.t_star = strong_oracle_index(inst);
  rep.strong_set = strong_oracle_set(inst, std::max(kappa, 1.0));
  rep.weak_set = weak_oracle_set(inst, kappa);
  rep.strong_bound = task_benchmark(inst, rep.t_star);
  rep.weak_choice = select_t_bar(inst, rep.weak_set);
  return rep;
}

std::pair<Vec, OracleReport> run_weak_oracle(const ProblemInstance& inst,
                                             BudgetedSampler& sampler, double kappa) {
  if (sampler.drawn_total() != 0)
    throw BudgetExceeded("run_weak_oracle needs a fresh sampler");
  OracleReport rep = make_oracle_report(inst, kappa);
  std::vector<Vec> samples = sampler.draw(rep.weak_choice, inst.n_budget());
  return {empirical_mean(samples), rep};
}

}  // namespace clsim
