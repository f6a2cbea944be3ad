#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "clsim/errors.hpp"
#include "clsim/models.hpp"

namespace clsim {

// High-probability radius multiplier g(delta) = c * ln(e/delta) for the
// empirical-mean error bound ||mean(K) - theta||^2 <= g(delta) d sigma^2 / K.
struct GFunction {
  double c_const = 4.0;

  double operator()(double delta) const;
};

inline double GFunction::operator()(double delta) const {
  if (!(delta > 0.0 && delta < 1.0))
    throw DeltaOutOfRange("delta must lie in (0,1), got " + std::to_string(delta));
  return c_const * std::log(M_E / delta);
}

Vec empirical_mean(const std::vector<Vec>& samples);

double squared_error(const Vec& estimate, const Vec& truth);

// Unbiased noise-scale estimator (1/(d(K-1))) sum ||Y_i - mean||^2.
double variance_hat(const std::vector<Vec>& samples);

// Same statistic read as an estimator of Tr[Sigma]/d; the guarantee
// differs (per-coordinate union bound instead of a chi-square tail).
double trace_hat(const std::vector<Vec>& samples);

// Monte-Carlo choice of the smallest c >= 1.01 such that the empirical
// (1-delta)-quantile of ||mean(K)-theta||^2 K/(d sigma^2) stays below
// c*ln(e/delta) across the whole delta grid.
GFunction calibrate_g(std::size_t dim, double sigma2, std::int64_t k_samples,
                      const std::vector<double>& delta_grid, std::int64_t reps,
                      std::uint64_t seed);

inline std::vector<double> default_delta_grid() { return {0.2, 0.1, 0.05, 0.01}; }

}  // namespace clsim
