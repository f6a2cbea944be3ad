#pragma once

#include <cstdint>
#include <vector>

#include "clsim/models.hpp"

namespace clsim {

// Unit vectors on the sphere with first coordinate zero and guaranteed
// pairwise separation c(d) = exp(-(d+2)/(d-2)).
struct PackingSet {
  std::vector<Vec> points;
  double separation = 0.0;
  std::size_t dim = 0;
};

// Le-Cam two-point construction: two parameter tuples (d = 1 per model),
// the total KL over N samples from every model, the Pinsker TV bound and
// the resulting two-point risk value.
struct TwoPointInstance {
  std::vector<double> hypothesis0;
  std::vector<double> hypothesis1;
  double kl_total = 0.0;
  double tv_bound = 0.0;    // sqrt(kl/2) clamped to [0,1]
  double lecam_value = 0.0; // (Delta0^2/2) * (1 - tv_bound)
  bool in_regime = true;    // construction's KL-smallness condition holds
};

// Testing set for the Fano argument: per hypothesis j, the T+1 means.
struct TestingSet {
  std::vector<std::vector<Vec>> points;  // points[j][t]
  std::size_t t_wo = 0;
  double q_wo = 0.0;
  double sigma_wo_2 = 0.0;
};

double packing_separation(std::size_t dim);  // c(d)

// Closed-form KL divergence between two multivariate Gaussians.
double kl_gaussian(const Vec& mu1, const Mat& cov1, const Vec& mu2, const Mat& cov2);

TwoPointInstance two_point_T1(double q1, double sigma0_2, double sigma1_2, std::int64_t n);

TwoPointInstance two_point_T2(double q1, double q2, double sigma0_2, double sigma1_2,
                              double sigma2_2, std::int64_t n);

// Weak-oracle index under sorted profiles (ascending q, descending sigma):
// the maximal index with q_t^2 <= kappa d sigma0^2 / N, 0 when none.
// ambiguous is set when duplicate distances make the index choice matter.
std::size_t t_wo_sorted(const std::vector<double>& q2s_sorted,
                        const std::vector<double>& sigma2s_sorted, double kappa,
                        std::int64_t n, std::size_t d, bool* ambiguous = nullptr);

// Semi-local minimax value (1/720)(sigma_T^2/N + q_med^2) at kappa = 1/(4d).
double semi_local_lower_bound(const std::vector<double>& q2s_sorted,
                      const std::vector<double>& sigma2s_sorted, std::int64_t n,
                      std::size_t d);

// Randomized greedy maximal packing on the lifted sphere construction.
PackingSet build_packing(std::size_t dim, std::size_t target_k, std::uint64_t seed,
                         std::int64_t stall_budget = 100000);

// Fano testing set in the noise-dominating regime (kappa = 1).
TestingSet build_testing_set(const PackingSet& packing, const std::vector<double>& q2s_sorted,
                             const std::vector<double>& sigma2s_sorted, std::int64_t n,
                             std::size_t d);

struct LocalizedLowerBound {
  double value = 0.0;
  bool noise_regime = true;  // d sigma_wo^2/N >= q_wo^2 branch
};

LocalizedLowerBound localized_lower_bound(double q_wo, double sigma_wo_2, std::int64_t n, std::size_t d);

}  // namespace clsim
