#include "clsim/estimators.hpp"

#include <algorithm>
#include <string>

namespace clsim {

Vec empirical_mean(const std::vector<Vec>& samples) {
  if (samples.empty()) throw EmptySample("empirical_mean needs at least one sample");
  Vec acc = Vec::Zero(samples[0].size());
  for (const Vec& s : samples) {
    if (s.size() != acc.size()) throw DimensionMismatch("sample dimension mismatch");
    acc += s;
  }
  return acc / static_cast<double>(samples.size());
}

double squared_error(const Vec& estimate, const Vec& truth) {
  if (estimate.size() != truth.size())
    throw DimensionMismatch("squared_error: length " + std::to_string(estimate.size()) +
                            " vs " + std::to_string(truth.size()));
  return (estimate - truth).squaredNorm();
}

double variance_hat(const std::vector<Vec>& samples) {
  const std::size_t k = samples.size();
  if (k < 2) throw TooFewSamples("variance_hat needs K >= 2");
  Vec mean = empirical_mean(samples);
  double acc = 0.0;
  for (const Vec& s : samples) acc += (s - mean).squaredNorm();
  const double d = static_cast<double>(mean.size());
  return acc / (d * static_cast<double>(k - 1));
}

double trace_hat(const std::vector<Vec>& samples) { return variance_hat(samples); }

GFunction calibrate_g(std::size_t dim, double sigma2, std::int64_t k_samples,
                      const std::vector<double>& delta_grid, std::int64_t reps,
                      std::uint64_t seed) {
  if (reps < 1000) throw ConfigError("calibrate_g needs reps >= 1000");
  if (k_samples < 1) throw ConfigError("calibrate_g needs k_samples >= 1");
  constexpr double kFloor = 1.01;
  if (sigma2 == 0.0) return GFunction{kFloor};

  // Normalized statistic ||mean(K) - theta||^2 * K / (d sigma^2); theta = 0
  // WLOG. The mean of K iid N(0, sigma^2 I) draws is sampled exactly as
  // N(0, (sigma^2/K) I), so each repetition costs d normals, not K*d.
  NormalSource normals(seed);
  std::vector<double> stats(static_cast<std::size_t>(reps));
  const double d = static_cast<double>(dim);
  const double k = static_cast<double>(k_samples);
  const double mean_sd = std::sqrt(sigma2 / k);
  for (double& stat : stats) {
    double sq = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
      double z = normals() * mean_sd;
      sq += z * z;
    }
    stat = sq * k / (d * sigma2);
  }
  std::sort(stats.begin(), stats.end());

  double c = kFloor;
  for (double delta : delta_grid) {
    if (!(delta > 0.0 && delta < 1.0)) throw DeltaOutOfRange("calibration delta out of (0,1)");
    // Empirical (1-delta)-quantile.
    std::size_t idx = static_cast<std::size_t>(
        std::min<double>(static_cast<double>(stats.size()) - 1.0,
                         std::ceil((1.0 - delta) * static_cast<double>(stats.size())) - 1.0));
    double quantile = stats[idx];
    c = std::max(c, quantile / std::log(M_E / delta));
  }
  return GFunction{c};
}

}  // namespace clsim
