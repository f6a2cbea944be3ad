#include "clsim/models.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>
#include <string>

namespace clsim {

namespace {

// Factor sigma2 * cov_shape into L L^T via a symmetric eigendecomposition,
// which tolerates semidefinite shapes (zero eigenvalues are legal).
Mat psd_factor(const Mat& shape, double sigma2, double tol) {
  Eigen::SelfAdjointEigenSolver<Mat> es(shape);
  if (es.info() != Eigen::Success) throw NotPSD("eigendecomposition of cov_shape failed");
  Vec ev = es.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev[i] < -tol) throw NotPSD("cov_shape has negative eigenvalue " + std::to_string(ev[i]));
    ev[i] = std::sqrt(std::max(0.0, ev[i]) * sigma2);
  }
  return es.eigenvectors() * ev.asDiagonal();
}

}  // namespace

ProblemInstance ProblemInstance::build(std::vector<TaskParams> tasks, std::int64_t n_budget,
                                       double c_theta) {
  if (tasks.empty()) throw DimensionMismatch("instance needs at least the target task");
  if (n_budget <= 0) throw ConfigError("n_budget must be positive");
  if (c_theta <= 0) throw ConfigError("c_theta must be positive");

  ProblemInstance inst;
  inst.dim_ = static_cast<std::size_t>(tasks[0].theta.size());
  if (inst.dim_ == 0) throw DimensionMismatch("theta vectors must be nonempty");
  inst.n_budget_ = n_budget;
  inst.c_theta_ = c_theta;

  const double sigma0_2 = tasks[0].sigma2;
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    const TaskParams& tp = tasks[t];
    if (static_cast<std::size_t>(tp.theta.size()) != inst.dim_)
      throw DimensionMismatch("theta length mismatch at task " + std::to_string(t));
    if (tp.sigma2 < 0) throw ConfigError("sigma2 must be nonnegative");
    if (t > 0 && !(tp.sigma2 < sigma0_2))
      throw VarianceOrderViolation("sigma_t^2 must be < sigma_0^2 (task " + std::to_string(t) +
                                   ": " + std::to_string(tp.sigma2) + " vs " +
                                   std::to_string(sigma0_2) + ")");
    if (tp.theta.norm() > c_theta * (1.0 + 1e-12))
      throw NormBoundViolation("||theta|| exceeds C_theta at task " + std::to_string(t));
    if (tp.cov_shape) {
      const Mat& s = *tp.cov_shape;
      if (s.rows() != static_cast<Eigen::Index>(inst.dim_) || s.cols() != s.rows())
        throw DimensionMismatch("cov_shape must be d x d at task " + std::to_string(t));
      if ((s - s.transpose()).cwiseAbs().maxCoeff() > kPsdTol)
        throw NotPSD("cov_shape not symmetric at task " + std::to_string(t));
      double tr = s.trace();
      double d = static_cast<double>(inst.dim_);
      if (std::abs(tr - d) > kPsdTol * std::max(1.0, d))
        throw NotPSD("trace(cov_shape) must equal d at task " + std::to_string(t));
    }
  }

  for (std::size_t t = 0; t < tasks.size(); ++t) {
    const TaskParams& tp = tasks[t];
    Mat shape = tp.cov_shape ? *tp.cov_shape
                             : Mat(Mat::Identity(static_cast<Eigen::Index>(inst.dim_),
                                                 static_cast<Eigen::Index>(inst.dim_)));
    inst.noise_factor_.push_back(psd_factor(shape, tp.sigma2, kPsdTol));
    inst.q_.push_back((tp.theta - tasks[0].theta).norm());
  }
  inst.tasks_ = std::move(tasks);
  return inst;
}

ProblemInstance build_instance(const std::vector<Vec>& thetas,
                               const std::vector<double>& sigma2s,
                               const std::vector<std::optional<Mat>>& cov_shapes,
                               std::int64_t n_budget, double c_theta) {
  if (thetas.size() != sigma2s.size() ||
      (!cov_shapes.empty() && cov_shapes.size() != thetas.size()))
    throw DimensionMismatch("thetas, sigma2s and cov_shapes must have equal length");
  std::vector<TaskParams> tasks(thetas.size());
  for (std::size_t t = 0; t < thetas.size(); ++t) {
    tasks[t].theta = thetas[t];
    tasks[t].sigma2 = sigma2s[t];
    if (!cov_shapes.empty()) tasks[t].cov_shape = cov_shapes[t];
  }
  return ProblemInstance::build(std::move(tasks), n_budget, c_theta);
}

ProblemInstance build_instance(const std::vector<Vec>& thetas,
                               const std::vector<double>& sigma2s,
                               std::int64_t n_budget, double c_theta) {
  return build_instance(thetas, sigma2s, {}, n_budget, c_theta);
}

BudgetedSampler::BudgetedSampler(const ProblemInstance& instance, std::uint64_t seed,
                                 bool record_history)
    : instance_(&instance),
      seed_(seed),
      record_history_(record_history),
      drawn_per_task_(instance.num_sources() + 1, 0) {
  streams_.reserve(instance.num_sources() + 1);
  for (std::size_t t = 0; t <= instance.num_sources(); ++t)
    streams_.emplace_back(task_stream_seed(seed, t));
}

std::vector<Vec> BudgetedSampler::draw(std::size_t task, std::int64_t count) {
  if (task >= drawn_per_task_.size())
    throw DimensionMismatch("task index out of range: " + std::to_string(task));
  if (count < 0) throw ConfigError("draw count must be nonnegative");
  if (drawn_total_ + count > instance_->n_budget())
    throw BudgetExceeded("draw of " + std::to_string(count) + " from task " +
                         std::to_string(task) + " would exceed budget " +
                         std::to_string(instance_->n_budget()) + " (used " +
                         std::to_string(drawn_total_) + ")");

  const Vec& mean = instance_->task(task).theta;
  const Mat& factor = instance_->noise_factor(task);
  const bool noiseless = instance_->task(task).sigma2 == 0.0;
  NormalSource& stream = streams_[task];

  std::vector<Vec> out;
  out.reserve(static_cast<std::size_t>(count));
  Vec z(mean.size());
  for (std::int64_t i = 0; i < count; ++i) {
    if (noiseless) {
      out.push_back(mean);
    } else {
      for (Eigen::Index j = 0; j < z.size(); ++j) z[j] = stream();
      out.push_back(mean + factor * z);
    }
    if (record_history_) history_.emplace_back(task, out.back());
  }
  drawn_total_ += count;
  drawn_per_task_[task] += count;
  return out;
}

}  // namespace clsim
