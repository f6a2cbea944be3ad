#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "clsim/models.hpp"

namespace clsim {

// Inputs of the elimination curve beta(tau): distances sorted ascending,
// variances in the same (sorted-by-Q) order, and the barrier factor
// g(delta_bar)/nu. sigma_bar2(m) below averages the first m variances in
// this order, matching the sorted-distance convention of the analysis.
struct CurveSpec {
  std::vector<double> q2s;      // ascending
  std::vector<double> sigma2s;  // same index order as q2s
  double sigma0_2 = 1.0;
  std::int64_t n_budget = 1;
  std::size_t dim = 1;
  double g_over_nu = 1.0;
  double tau_min = 0.0;  // (1/T) * ceil(sigma0^2 / sigma_bar2([T]))

  std::size_t T() const { return q2s.size(); }
  double sigma_bar2_first(std::size_t m) const;  // mean of the first m variances
};

CurveSpec make_curve_spec(std::vector<double> q2s, std::vector<double> sigma2s,
                          double sigma0_2, std::int64_t n_budget, std::size_t dim,
                          double g_over_nu);

// Curve spec derived from an instance (tasks sorted by distance).
CurveSpec curve_from_instance(const ProblemInstance& inst, double g_over_nu);

// Surviving fraction when a fraction tau of the sources is retained.
// Piecewise constant; tau <= tau_min uses the weak-oracle barrier branch.
double beta(const CurveSpec& curve, double tau);

// Functional-power orbit [1, beta(1), beta(beta(1)), ...] of length at
// most r+1, truncated at a repeat or once a value drops to tau_min.
std::vector<double> iterate(const CurveSpec& curve, std::int64_t r);

// Round count ln(tau_min)/ln(beta_bar) under the linear envelope
// beta(tau) <= beta_bar * tau.
double rounds_needed(double beta_bar, double tau_min);

// Largest jump-grid point tau in (tau_min, 1] with beta(tau) >= tau.
std::optional<double> has_fixed_point_above(const CurveSpec& curve, double tau_min);

// All jump points of beta on (tau_min, 1] plus the endpoints, ascending.
std::vector<double> curve_grid(const CurveSpec& curve);

}  // namespace clsim
