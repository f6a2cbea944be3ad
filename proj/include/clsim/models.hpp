#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "clsim/errors.hpp"
#include "clsim/rng.hpp"

namespace clsim {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// One Gaussian mean-estimation model: mean vector, noise scale and an
// optional normalized covariance shape (symmetric PSD with trace d;
// identity when absent).
struct TaskParams {
  Vec theta;
  double sigma2 = 0.0;
  std::optional<Mat> cov_shape;
};

// Target model (index 0) plus T source models, with the derived
// distances Q_t = ||theta_t - theta_0|| precomputed. Immutable after
// construction and freely shareable across threads.
class ProblemInstance {
 public:
  static constexpr double kPsdTol = 1e-9;

  // Validates and builds an instance. thetas[0] is the target.
  static ProblemInstance build(std::vector<TaskParams> tasks, std::int64_t n_budget,
                               double c_theta);

  std::size_t num_sources() const { return tasks_.size() - 1; }
  std::size_t dim() const { return dim_; }
  std::int64_t n_budget() const { return n_budget_; }
  double c_theta() const { return c_theta_; }

  const TaskParams& task(std::size_t t) const { return tasks_.at(t); }
  double sigma2(std::size_t t) const { return tasks_.at(t).sigma2; }
  double q(std::size_t t) const { return q_.at(t); }
  double q2(std::size_t t) const { return q_.at(t) * q_.at(t); }

  // Q_t for t in [T], index order (target excluded).
  std::vector<double> distances() const {
    return std::vector<double>(q_.begin() + 1, q_.end());
  }

  // Factor L with L L^T = sigma2 * cov_shape, used for sampling.
  const Mat& noise_factor(std::size_t t) const { return noise_factor_.at(t); }

 private:
  ProblemInstance() = default;

  std::vector<TaskParams> tasks_;
  std::vector<double> q_;             // Q_0 = 0, Q_t for t in [T]
  std::vector<Mat> noise_factor_;     // per-task L
  std::size_t dim_ = 0;
  std::int64_t n_budget_ = 0;
  double c_theta_ = 0.0;
};

// Convenience builder matching the operation signature: parallel lists of
// means and variances, optional covariance shapes.
ProblemInstance build_instance(const std::vector<Vec>& thetas,
                               const std::vector<double>& sigma2s,
                               const std::vector<std::optional<Mat>>& cov_shapes,
                               std::int64_t n_budget, double c_theta);

ProblemInstance build_instance(const std::vector<Vec>& thetas,
                               const std::vector<double>& sigma2s,
                               std::int64_t n_budget, double c_theta);

// Stateful sample source over the T+1 models of one instance. Enforces
// the total budget N, records the sampling history, and derives one
// independent deterministic stream per task from (seed, task index).
// Single-owner mutable state: one sampler per repetition.
class BudgetedSampler {
 public:
  BudgetedSampler(const ProblemInstance& instance, std::uint64_t seed,
                  bool record_history = true);

  // k fresh independent draws from task t, appended to the history.
  std::vector<Vec> draw(std::size_t task, std::int64_t count);

  std::int64_t drawn_total() const { return drawn_total_; }
  std::int64_t drawn_per_task(std::size_t t) const { return drawn_per_task_.at(t); }
  std::int64_t remaining() const { return instance_->n_budget() - drawn_total_; }
  std::uint64_t seed() const { return seed_; }
  const ProblemInstance& instance() const { return *instance_; }
  const std::vector<std::pair<std::size_t, Vec>>& history() const { return history_; }

 private:
  const ProblemInstance* instance_;
  std::uint64_t seed_;
  bool record_history_;
  std::int64_t drawn_total_ = 0;
  std::vector<std::int64_t> drawn_per_task_;
  std::vector<NormalSource> streams_;
  std::vector<std::pair<std::size_t, Vec>> history_;
};

}  // namespace clsim
