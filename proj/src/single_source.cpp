#include "clsim/single_source.hpp"

#include <algorithm>
#include <string>

namespace clsim {

bool eliminate_predicate(const Vec& theta0_hat, const Vec& theta_t_hat, double lambda_max2) {
  if (lambda_max2 < 0) throw ConfigError("lambda_max2 must be nonnegative");
  return squared_error(theta0_hat, theta_t_hat) >= 10.0 * lambda_max2;
}

SingleSourceOutcome run_single_source(const ProblemInstance& inst, BudgetedSampler& sampler,
                                      double delta, const GFunction& g) {
  if (inst.num_sources() != 1)
    throw DimensionMismatch("run_single_source needs exactly one source, got " +
                            std::to_string(inst.num_sources()));
  if (!(delta > 0.0 && delta < 1.0)) throw DeltaOutOfRange("delta must lie in (0,1)");

  const std::int64_t half = inst.n_budget() / 2;  // odd N: the leftover sample is unused
  if (half < 1) throw InsufficientBudget("budget too small to split");

  Vec theta0_hat = empirical_mean(sampler.draw(0, half));
  Vec theta1_hat = empirical_mean(sampler.draw(1, half));

  SingleSourceOutcome out;
  out.delta_used = delta;
  out.stat = squared_error(theta0_hat, theta1_hat);
  out.threshold = 10.0 * g(delta) * static_cast<double>(inst.dim()) * inst.sigma2(0) /
                  static_cast<double>(half);
  out.chose_source = out.stat < out.threshold;
  out.estimate = out.chose_source ? theta1_hat : theta0_hat;
  return out;
}

DeltaStar delta_star_single(const ProblemInstance& inst) {
  if (inst.num_sources() != 1)
    throw DimensionMismatch("delta_star_single needs exactly one source");
  const double s0 = inst.sigma2(0);
  const double s1 = inst.sigma2(1);
  const double d = static_cast<double>(inst.dim());
  const double n = static_cast<double>(inst.n_budget());
  const double ratio = (s0 + s1 > 0.0) ? s1 / (s0 + s1) : 0.0;
  const double inner = std::max({ratio, 0.25, d * s0 / (8.0 * inst.c_theta() * inst.c_theta() * n)});
  DeltaStar ds;
  ds.raw = inner * inner;
  ds.clamped = ds.raw > 0.5;
  ds.value = ds.clamped ? 0.5 : ds.raw;
  return ds;
}

}  // namespace clsim
