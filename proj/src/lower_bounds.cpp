#include "clsim/lower_bounds.hpp"

#include <Eigen/Cholesky>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "clsim/rng.hpp"

namespace clsim {

namespace {

// KL between N(mu1, s2) and N(mu2, s2): the mean-shift term only, with
// the convention that two identical degenerate laws have zero divergence.
double kl_same_var(double delta_mu, double s2) {
  if (s2 == 0.0) return delta_mu == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return delta_mu * delta_mu / (2.0 * s2);
}

void finish_two_point(TwoPointInstance& tp) {
  tp.tv_bound = std::min(1.0, std::sqrt(std::max(0.0, tp.kl_total) / 2.0));
  const double delta0 = std::abs(tp.hypothesis0[0] - tp.hypothesis1[0]);
  tp.lecam_value = delta0 * delta0 / 2.0 * (1.0 - tp.tv_bound);
}

}  // namespace

double packing_separation(std::size_t dim) {
  if (dim < 3) throw DimensionTooSmall("packing needs d >= 3");
  const double d = static_cast<double>(dim);
  return std::exp(-(d + 2.0) / (d - 2.0));
}

double kl_gaussian(const Vec& mu1, const Mat& cov1, const Vec& mu2, const Mat& cov2) {
  const Eigen::Index d = mu1.size();
  if (mu2.size() != d || cov1.rows() != d || cov1.cols() != d || cov2.rows() != d ||
      cov2.cols() != d)
    throw DimensionMismatch("kl_gaussian: inconsistent dimensions");
  Eigen::LLT<Mat> llt1(cov1), llt2(cov2);
  if (llt1.info() != Eigen::Success || llt2.info() != Eigen::Success)
    throw SingularCovariance("kl_gaussian needs positive definite covariances");

  double logdet1 = 0.0, logdet2 = 0.0;
  for (Eigen::Index i = 0; i < d; ++i) {
    logdet1 += 2.0 * std::log(llt1.matrixL()(i, i));
    logdet2 += 2.0 * std::log(llt2.matrixL()(i, i));
  }
  const Mat cov2_inv_cov1 = llt2.solve(cov1);
  const Vec diff = mu2 - mu1;
  return 0.5 * (logdet2 - logdet1) - 0.5 * static_cast<double>(d) +
         0.5 * cov2_inv_cov1.trace() + 0.5 * diff.dot(llt2.solve(diff));
}

TwoPointInstance two_point_T1(double q1, double sigma0_2, double sigma1_2, std::int64_t n) {
  if (q1 < 0 || sigma0_2 < 0 || sigma1_2 < 0 || n < 1)
    throw ConfigError("two_point_T1: invalid inputs");
  const double nn = static_cast<double>(n);
  const double v = q1 + std::sqrt(sigma1_2) / (4.0 * std::sqrt(nn));

  TwoPointInstance tp;
  tp.hypothesis0 = {-v, -v + q1};
  tp.hypothesis1 = {v, v - q1};
  // Relative slack keeps exact boundary constructions inside the regime.
  tp.in_regime = v * v <= sigma0_2 / (4.0 * nn) * (1.0 + 1e-12);
  tp.kl_total = nn * kl_same_var(2.0 * v, sigma0_2) +
                nn * kl_same_var(2.0 * (v - q1), sigma1_2);
  finish_two_point(tp);
  return tp;
}

TwoPointInstance two_point_T2(double q1, double q2, double sigma0_2, double sigma1_2,
                              double sigma2_2, std::int64_t n) {
  if (!(sigma0_2 >= sigma1_2 && sigma1_2 >= sigma2_2) || q1 > q2)
    throw OrderingViolation("two_point_T2 needs sigma0^2 >= sigma1^2 >= sigma2^2 and q1 <= q2");
  if (q1 < 0 || sigma2_2 < 0 || n < 1) throw ConfigError("two_point_T2: invalid inputs");
  const double nn = static_cast<double>(n);
  const double u = 0.5 * q1 + 0.5 * q2 + std::sqrt(sigma2_2) / (4.0 * std::sqrt(nn));

  TwoPointInstance tp;
  tp.hypothesis0 = {-u, -u + q1, -u + q2};
  tp.hypothesis1 = {u, u - q2, u - q1};
  tp.in_regime = u * u <= sigma0_2 / (4.0 * nn) * (1.0 + 1e-12);
  const double source_shift = 2.0 * u - q1 - q2;  // = sigma2 / (2 sqrt(N))
  tp.kl_total = nn * kl_same_var(2.0 * u, sigma0_2) +
                nn * kl_same_var(source_shift, sigma1_2) +
                nn * kl_same_var(source_shift, sigma2_2);
  finish_two_point(tp);
  return tp;
}

std::size_t t_wo_sorted(const std::vector<double>& q2s_sorted,
                        const std::vector<double>& sigma2s_sorted, double kappa,
                        std::int64_t n, std::size_t d, bool* ambiguous) {
  if (sigma2s_sorted.size() != q2s_sorted.size() + 1)
    throw DimensionMismatch("sigma2s must have length T+1 (target first)");
  if (!std::is_sorted(q2s_sorted.begin(), q2s_sorted.end()))
    throw OrderingViolation("q2s must be ascending");
  if (!std::is_sorted(sigma2s_sorted.rbegin(), sigma2s_sorted.rend()))
    throw OrderingViolation("sigma2s must be descending");

  const double cutoff =
      kappa * static_cast<double>(d) * sigma2s_sorted[0] / static_cast<double>(n);
  std::size_t t_wo = 0;
  for (std::size_t t = 1; t <= q2s_sorted.size(); ++t)
    if (q2s_sorted[t - 1] <= cutoff) t_wo = t;
  if (ambiguous) {
    *ambiguous = false;
    if (t_wo >= 1)
      for (std::size_t t = 1; t < t_wo; ++t)
        if (q2s_sorted[t - 1] == q2s_sorted[t_wo - 1]) *ambiguous = true;
  }
  return t_wo;
}

double semi_local_lower_bound(const std::vector<double>& q2s_sorted,
                      const std::vector<double>& sigma2s_sorted, std::int64_t n,
                      std::size_t d) {
  const double kappa = 1.0 / (4.0 * static_cast<double>(d));
  const std::size_t t_wo = t_wo_sorted(q2s_sorted, sigma2s_sorted, kappa, n, d);
  // No close models when the weak set is empty: the distance term drops.
  double q_med2 = 0.0;
  if (t_wo >= 1) {
    const std::size_t t_med = (t_wo + 1 + 1) / 2;  // ceil((t_wo+1)/2)
    q_med2 = q2s_sorted[t_med - 1];
  }
  const double sigma_T2 = sigma2s_sorted.back();
  return (sigma_T2 / static_cast<double>(n) + q_med2) / 720.0;
}

PackingSet build_packing(std::size_t dim, std::size_t target_k, std::uint64_t seed,
                         std::int64_t stall_budget) {
  if (dim < 3) throw DimensionTooSmall("build_packing needs d >= 3");
  const double sep = packing_separation(dim);
  const std::size_t low_dim = dim - 2;

  PackingSet pack;
  pack.dim = dim;
  pack.separation = sep;

  NormalSource normals(seed);
  std::int64_t stall = 0;
  while (pack.points.size() < target_k && stall < stall_budget) {
    // Uniform candidate in the (d-2)-ball: normalized Gaussian direction
    // scaled by U^(1/(d-2)).
    Vec tilde(static_cast<Eigen::Index>(low_dim));
    for (Eigen::Index i = 0; i < tilde.size(); ++i) tilde[i] = normals();
    double norm = tilde.norm();
    if (norm == 0.0) continue;
    double radius = std::pow(normals.uniform_open(), 1.0 / static_cast<double>(low_dim));
    tilde *= radius / norm;

    Vec v = Vec::Zero(static_cast<Eigen::Index>(dim));
    v.segment(1, static_cast<Eigen::Index>(low_dim)) = tilde;
    v[static_cast<Eigen::Index>(dim) - 1] =
        std::sqrt(std::max(0.0, 1.0 - tilde.squaredNorm()));

    bool ok = true;
    for (const Vec& p : pack.points) {
      if ((p - v).norm() < sep) {
        ok = false;
        break;
      }
    }
    if (ok) {
      pack.points.push_back(std::move(v));
      stall = 0;
    } else {
      ++stall;
    }
  }
  return pack;
}

TestingSet build_testing_set(const PackingSet& packing, const std::vector<double>& q2s_sorted,
                             const std::vector<double>& sigma2s_sorted, std::int64_t n,
                             std::size_t d) {
  if (packing.dim != d || d < 3) throw DimensionTooSmall("testing set needs the packing's d >= 3");
  const std::size_t t_wo = t_wo_sorted(q2s_sorted, sigma2s_sorted, 1.0, n, d);
  const double sigma_wo_2 = sigma2s_sorted[t_wo];
  const double q_wo_2 = t_wo >= 1 ? q2s_sorted[t_wo - 1] : 0.0;
  const double noise_level = static_cast<double>(d) * sigma_wo_2 / static_cast<double>(n);
  if (noise_level < q_wo_2)
    throw RegimeViolation("testing set needs d sigma_wo^2/N >= q_wo^2");
  const double scale = std::sqrt(noise_level);

  TestingSet set;
  set.t_wo = t_wo;
  set.q_wo = std::sqrt(q_wo_2);
  set.sigma_wo_2 = sigma_wo_2;
  const std::size_t T = q2s_sorted.size();
  for (const Vec& v : packing.points) {
    std::vector<Vec> tuple(T + 1);
    for (std::size_t t = 0; t <= T; ++t) {
      const double q_t = t == 0 ? 0.0 : std::sqrt(q2s_sorted[t - 1]);
      if (t <= t_wo) {
        tuple[t] = (scale - q_t) * v;
      } else {
        const double under = q_t * q_t - noise_level;
        if (under < 0) throw RegimeViolation("far model inside the noise ball at t=" +
                                             std::to_string(t));
        tuple[t] = Vec::Zero(static_cast<Eigen::Index>(d));
        tuple[t][0] = std::sqrt(under);
      }
    }
    set.points.push_back(std::move(tuple));
  }
  return set;
}

LocalizedLowerBound localized_lower_bound(double q_wo, double sigma_wo_2, std::int64_t n, std::size_t d) {
  if (d < 3) throw DimensionTooSmall("localized_lower_bound needs d >= 3");
  const double c = packing_separation(d);
  const double noise_level = static_cast<double>(d) * sigma_wo_2 / static_cast<double>(n);
  LocalizedLowerBound out;
  out.noise_regime = noise_level >= q_wo * q_wo;
  out.value = out.noise_regime ? c * c / 2.0 * noise_level : c * c / 8.0 * q_wo * q_wo;
  return out;
}

}  // namespace clsim
