#pragma once

#include "clsim/estimators.hpp"
#include "clsim/models.hpp"

namespace clsim {

// Outcome of the two-estimate elimination method for T = 1.
struct SingleSourceOutcome {
  Vec estimate;
  bool chose_source = false;  // equals (stat < threshold)
  double threshold = 0.0;     // 10 g(delta) d sigma_0^2 / floor(N/2)
  double stat = 0.0;          // ||theta0_hat - theta1_hat||^2
  double delta_used = 0.0;
};

struct DeltaStar {
  double value = 0.0;  // after clamping to (0, 0.5]
  double raw = 0.0;
  bool clamped = false;
};

// Elimination test of the source-elimination corollary: discard when
// ||theta0_hat - theta_t_hat||^2 >= 10 * lambda_max^2 (inclusive).
bool eliminate_predicate(const Vec& theta0_hat, const Vec& theta_t_hat, double lambda_max2);

// Splits the budget in half between target and source, compares the two
// empirical means, and keeps the source only when they are close.
SingleSourceOutcome run_single_source(const ProblemInstance& inst, BudgetedSampler& sampler,
                                      double delta, const GFunction& g);

// The reliability level delta* from the expected-loss statement:
// [ sigma1^2/(sigma0^2+sigma1^2) v 1/4 v d sigma0^2/(8 C_theta^2 N) ]^2.
DeltaStar delta_star_single(const ProblemInstance& inst);

}  // namespace clsim
