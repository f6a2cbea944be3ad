#include "clsim/elimination_curve.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace clsim {

double CurveSpec::sigma_bar2_first(std::size_t m) const {
  if (m == 0 || m > sigma2s.size()) throw ConfigError("sigma_bar2_first: m out of range");
  double acc = std::accumulate(sigma2s.begin(), sigma2s.begin() + static_cast<long>(m), 0.0);
  return acc / static_cast<double>(m);
}

CurveSpec make_curve_spec(std::vector<double> q2s, std::vector<double> sigma2s,
                          double sigma0_2, std::int64_t n_budget, std::size_t dim,
                          double g_over_nu) {
  if (q2s.size() != sigma2s.size() || q2s.empty())
    throw DimensionMismatch("curve spec needs matching nonempty q2s/sigma2s");
  if (!std::is_sorted(q2s.begin(), q2s.end()))
    throw OrderingViolation("curve q2s must be ascending");
  CurveSpec c;
  c.q2s = std::move(q2s);
  c.sigma2s = std::move(sigma2s);
  c.sigma0_2 = sigma0_2;
  c.n_budget = n_budget;
  c.dim = dim;
  c.g_over_nu = g_over_nu;
  c.tau_min = std::ceil(sigma0_2 / c.sigma_bar2_first(c.T())) / static_cast<double>(c.T());
  return c;
}

CurveSpec curve_from_instance(const ProblemInstance& inst, double g_over_nu) {
  std::vector<std::size_t> order(inst.num_sources());
  std::iota(order.begin(), order.end(), std::size_t{1});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return inst.q2(a) < inst.q2(b); });
  std::vector<double> q2s, s2s;
  for (std::size_t t : order) {
    q2s.push_back(inst.q2(t));
    s2s.push_back(inst.sigma2(t));
  }
  return make_curve_spec(std::move(q2s), std::move(s2s), inst.sigma2(0), inst.n_budget(),
                         inst.dim(), g_over_nu);
}

static double barrier_at(const CurveSpec& c, double tau) {
  const double d = static_cast<double>(c.dim);
  const double n = static_cast<double>(c.n_budget);
  if (tau > c.tau_min) {
    const std::size_t m = static_cast<std::size_t>(
        std::ceil(tau * static_cast<double>(c.T()) - 1e-12));
    return c.g_over_nu * d * c.sigma_bar2_first(std::max<std::size_t>(1, m)) *
           static_cast<double>(m) / n;
  }
  return c.g_over_nu * d * c.sigma0_2 / n;
}

double beta(const CurveSpec& curve, double tau) {
  if (!(tau > 0.0 && tau <= 1.0)) throw TauOutOfRange("beta: tau must lie in (0,1]");
  const double cutoff = barrier_at(curve, tau);
  std::size_t count = 0;
  for (double q2 : curve.q2s)
    if (q2 <= cutoff) ++count;
  return static_cast<double>(count) / static_cast<double>(curve.T());
}

std::vector<double> iterate(const CurveSpec& curve, std::int64_t r) {
  if (r < 0) throw ParamOutOfRange("iterate: r must be >= 0");
  std::vector<double> orbit{1.0};
  for (std::int64_t i = 0; i < r; ++i) {
    double tau = orbit.back();
    if (tau <= curve.tau_min || tau <= 0.0) break;
    double next = beta(curve, tau);
    orbit.push_back(next);
    if (next == tau) break;  // fixed point
  }
  return orbit;
}

double rounds_needed(double beta_bar, double tau_min) {
  if (!(beta_bar > 0.0 && beta_bar < 1.0))
    throw ParamOutOfRange("rounds_needed: beta_bar must lie in (0,1)");
  if (!(tau_min > 0.0 && tau_min < 1.0))
    throw ParamOutOfRange("rounds_needed: tau_min must lie in (0,1)");
  return std::log(tau_min) / std::log(beta_bar);
}

std::vector<double> curve_grid(const CurveSpec& curve) {
  const double T = static_cast<double>(curve.T());
  std::vector<double> grid;
  if (curve.tau_min > 0.0 && curve.tau_min < 1.0) grid.push_back(curve.tau_min);
  for (std::size_t m = 1; m <= curve.T(); ++m) {
    double tau = static_cast<double>(m) / T;
    if (tau > curve.tau_min && tau <= 1.0) grid.push_back(tau);
  }
  if (grid.empty() || grid.back() != 1.0) grid.push_back(1.0);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

std::optional<double> has_fixed_point_above(const CurveSpec& curve, double tau_min) {
  std::optional<double> found;
  for (double tau : curve_grid(curve)) {
    if (tau <= tau_min || tau > 1.0) continue;
    if (beta(curve, tau) >= tau) found = tau;
  }
  return found;
}

}  // namespace clsim
