#include "clsim/multi_source.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace clsim {

void EliminationConfig::validate() const {
  if (r_bar < 1) throw ConfigError("r_bar must be >= 1");
  if (!(delta > 0.0 && delta < 1.0)) throw DeltaOutOfRange("delta must lie in (0,1)");
  if (!(nu > 0.0 && nu <= 1.0)) throw ConfigError("nu must lie in (0,1]");
}

namespace {

double sigma_bar2(const std::vector<std::size_t>& retained,
                  const std::map<std::size_t, double>& sigma2s) {
  double acc = 0.0;
  for (std::size_t t : retained) acc += sigma2s.at(t);
  return acc / static_cast<double>(retained.size());
}

}  // namespace

std::map<std::size_t, std::int64_t> allocate_round(const std::vector<std::size_t>& retained,
                                                   const std::map<std::size_t, double>& sigma2s,
                                                   std::int64_t n_bar) {
  if (retained.empty()) throw ConfigError("allocate_round: retained set is empty");
  if (n_bar < static_cast<std::int64_t>(retained.size()))
    throw InsufficientBudget("n_bar=" + std::to_string(n_bar) + " below retained count " +
                             std::to_string(retained.size()));

  const double sbar2 = sigma_bar2(retained, sigma2s);
  const double r_count = static_cast<double>(retained.size());
  std::vector<double> raw(retained.size());
  for (std::size_t i = 0; i < retained.size(); ++i) {
    raw[i] = sbar2 > 0.0
                 ? static_cast<double>(n_bar) / r_count * sigma2s.at(retained[i]) / sbar2
                 : static_cast<double>(n_bar) / r_count;  // all-noiseless: uniform
  }

  // Largest-remainder rounding.
  std::vector<std::int64_t> alloc(retained.size());
  std::int64_t assigned = 0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    alloc[i] = static_cast<std::int64_t>(std::floor(raw[i]));
    assigned += alloc[i];
  }
  std::vector<std::size_t> order(raw.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    double ra = raw[a] - std::floor(raw[a]);
    double rb = raw[b] - std::floor(raw[b]);
    if (ra != rb) return ra > rb;
    return a < b;
  });
  for (std::size_t i = 0; assigned < n_bar; ++i) {
    ++alloc[order[i % order.size()]];
    ++assigned;
  }

  // Floor of one sample per retained task; donors are the entries with
  // the largest surplus over their real-valued share.
  for (std::size_t i = 0; i < alloc.size(); ++i) {
    while (alloc[i] < 1) {
      std::size_t donor = alloc.size();
      double best_surplus = -std::numeric_limits<double>::infinity();
      for (std::size_t j = 0; j < alloc.size(); ++j) {
        if (alloc[j] >= 2) {
          double surplus = static_cast<double>(alloc[j]) - raw[j];
          if (surplus > best_surplus) {
            best_surplus = surplus;
            donor = j;
          }
        }
      }
      if (donor == alloc.size()) throw InsufficientBudget("cannot honor one-sample floor");
      --alloc[donor];
      ++alloc[i];
    }
  }

  std::map<std::size_t, std::int64_t> out;
  for (std::size_t i = 0; i < retained.size(); ++i) out[retained[i]] = alloc[i];
  return out;
}

double elimination_threshold(const std::vector<std::size_t>& retained,
                             const std::map<std::size_t, double>& sigma2s, double sigma0_2,
                             std::int64_t n_bar, double delta_bar, const GFunction& g,
                             std::size_t dim) {
  if (retained.empty()) throw ConfigError("elimination_threshold: retained set is empty");
  const double d = static_cast<double>(dim);
  const double n = static_cast<double>(n_bar);
  const double first = d * sigma_bar2(retained, sigma2s) * static_cast<double>(retained.size()) / n;
  const double second = d * sigma0_2 / n;
  return 10.0 * g(delta_bar) * std::max(first, second);
}

std::optional<StopReason> stop_check(const std::vector<std::size_t>& retained_before,
                                     const std::vector<std::size_t>& retained_after,
                                     const std::map<std::size_t, double>& sigma2s,
                                     double sigma0_2) {
  if (!retained_before.empty() &&
      static_cast<double>(retained_before.size()) <= sigma0_2 / sigma_bar2(retained_before, sigma2s))
    return StopReason::SmallRetained;
  if (retained_after.empty()) return StopReason::AllEliminated;
  if (retained_after == retained_before) return StopReason::NoProgress;
  return std::nullopt;
}

namespace {

// Uniform pick among the variance minimizers of the retained set, driven
// by a dedicated deterministic stream so sampling streams stay untouched.
std::size_t pick_final_task(const std::vector<std::size_t>& retained,
                            const std::map<std::size_t, double>& sigma2s,
                            const ProblemInstance& inst, FinalPick mode,
                            std::uint64_t seed) {
  if (retained.empty()) return 0;
  if (mode == FinalPick::PessimisticTrueDistance) {
    std::size_t best = retained.front();
    for (std::size_t t : retained) {
      double st = sigma2s.at(t), sb = sigma2s.at(best);
      if (st < sb || (st == sb && inst.q2(t) > inst.q2(best)) ||
          (st == sb && inst.q2(t) == inst.q2(best) && t < best))
        best = t;
    }
    return best;
  }
  double min_s2 = std::numeric_limits<double>::infinity();
  for (std::size_t t : retained) min_s2 = std::min(min_s2, sigma2s.at(t));
  std::vector<std::size_t> argmin;
  for (std::size_t t : retained)
    if (sigma2s.at(t) == min_s2) argmin.push_back(t);
  if (argmin.size() == 1) return argmin.front();
  SplitMix64 sm(mix_seed(seed, 0xF1A15ULL));
  return argmin[sm.next() % argmin.size()];
}

EliminationTrace run_core(const ProblemInstance& inst, BudgetedSampler& sampler,
                          const EliminationConfig& config) {
  config.validate();
  if (sampler.drawn_total() != 0) throw BudgetExceeded("run_algorithm1 needs a fresh sampler");

  const std::size_t T = inst.num_sources();
  if (T == 0) throw ConfigError("elimination needs at least one source task");
  const double TT = static_cast<double>(T);
  const std::int64_t N = inst.n_budget();
  const std::int64_t r_bar = config.r_bar;
  const bool estimated = config.variance_mode != VarianceMode::Known;

  EliminationTrace trace;
  std::map<std::size_t, double> sigma2s;

  if (!estimated) {
    if (N < (r_bar + 2) * static_cast<std::int64_t>(T))
      throw InsufficientBudget("need N >= (r_bar+2)*T");
    trace.n_bar = N / (r_bar + 2);
    trace.delta_bar = config.delta / (TT * static_cast<double>(r_bar) + 2.0);
    for (std::size_t t = 0; t <= T; ++t) sigma2s[t] = inst.sigma2(t);
  } else {
    trace.n_bar = N / (r_bar + 3);
    trace.delta_bar =
        config.delta / (TT * (static_cast<double>(r_bar) + 1.0) + 3.0);
    if (N < 2 * (r_bar + 3) * static_cast<std::int64_t>(T + 1))
      throw PreconditionViolated("need N >= 2(r_bar+3)(T+1): N=" + std::to_string(N));
    const double dN = static_cast<double>(inst.dim()) * static_cast<double>(N);
    const double log_term = std::log(2.0 / trace.delta_bar);
    const std::int64_t k_est = trace.n_bar / static_cast<std::int64_t>(T + 1);
    if (config.variance_mode == VarianceMode::EstimatedVariance) {
      const double need = 48.0 * static_cast<double>(r_bar + 3) * static_cast<double>(T + 1) * log_term;
      if (dN < need)
        throw PreconditionViolated("need d*N >= 48(r_bar+3)(T+1)log(2/delta_bar): " +
                                   std::to_string(dN) + " < " + std::to_string(need));
    } else {
      const double need_k = 24.0 * (std::log(static_cast<double>(inst.dim())) + log_term) + 1.0;
      if (static_cast<double>(k_est) < need_k)
        throw PreconditionViolated("need N_bar/(T+1) >= 1 + 24(log d + log(2/delta_bar)): " +
                                   std::to_string(k_est) + " < " + std::to_string(need_k));
    }
    if (k_est < 2) throw PreconditionViolated("estimation round needs >= 2 samples per task");
    // Preliminary estimation round.
    trace.sigma2_hat.resize(T + 1);
    for (std::size_t t = 0; t <= T; ++t) {
      std::vector<Vec> pre = sampler.draw(t, k_est);
      trace.sigma2_hat[t] = config.variance_mode == VarianceMode::EstimatedVariance
                                ? variance_hat(pre)
                                : trace_hat(pre);
      sigma2s[t] = trace.sigma2_hat[t];
    }
  }
  if (trace.n_bar < 1) throw InsufficientBudget("budget too small for one batch");

  const double sigma0_2 = sigma2s.at(0);

  // Initial target estimate; reused by every round's elimination test.
  Vec theta0_hat = empirical_mean(sampler.draw(0, trace.n_bar));

  std::vector<std::size_t> retained(T);
  std::iota(retained.begin(), retained.end(), std::size_t{1});

  for (std::int64_t r = 1; r <= r_bar; ++r) {
    RoundRecord rec;
    rec.retained_before = retained;
    rec.allocations = allocate_round(retained, sigma2s, trace.n_bar);
    rec.threshold = elimination_threshold(retained, sigma2s, sigma0_2, trace.n_bar,
                                          trace.delta_bar, config.g, inst.dim());
    std::vector<std::size_t> next;
    for (std::size_t t : retained) {
      Vec theta_t_hat = empirical_mean(sampler.draw(t, rec.allocations.at(t)));
      double stat = squared_error(theta0_hat, theta_t_hat);
      rec.stats[t] = stat;
      if (stat >= rec.threshold)
        rec.eliminated.push_back(t);
      else
        next.push_back(t);
    }
    rec.stop_reason = stop_check(rec.retained_before, next, sigma2s, sigma0_2);
    retained = next;
    const bool stop = rec.stop_reason.has_value();
    if (!stop && r == r_bar) rec.stop_reason = StopReason::MaxRounds;
    trace.rounds.push_back(std::move(rec));
    if (stop) break;
  }

  trace.t_alg = retained;
  trace.t_star = pick_final_task(retained, sigma2s, inst, config.final_pick, sampler.seed());
  trace.final_estimate = empirical_mean(sampler.draw(trace.t_star, trace.n_bar));
  trace.samples_used = sampler.drawn_total();
  return trace;
}

}  // namespace

EliminationTrace run_algorithm1(const ProblemInstance& inst, BudgetedSampler& sampler,
                                const EliminationConfig& config) {
  if (config.variance_mode != VarianceMode::Known)
    throw ConfigError("run_algorithm1 expects VarianceMode::Known");
  return run_core(inst, sampler, config);
}

EliminationTrace run_algorithm1_unknown_variance(const ProblemInstance& inst,
                                                 BudgetedSampler& sampler,
                                                 const EliminationConfig& config) {
  EliminationConfig c = config;
  c.variance_mode = VarianceMode::EstimatedVariance;
  return run_core(inst, sampler, c);
}

EliminationTrace run_algorithm1_unknown_covariance(const ProblemInstance& inst,
                                                   BudgetedSampler& sampler,
                                                   const EliminationConfig& config) {
  EliminationConfig c = config;
  c.variance_mode = VarianceMode::EstimatedTrace;
  return run_core(inst, sampler, c);
}

double delta_star_multi(const ProblemInstance& inst) {
  const std::size_t T = inst.num_sources();
  double s_min = std::numeric_limits<double>::infinity();
  double s_max = 0.0;
  double bench_min = std::numeric_limits<double>::infinity();
  const double d = static_cast<double>(inst.dim());
  const double n = static_cast<double>(inst.n_budget());
  const double c2 = inst.c_theta() * inst.c_theta();
  for (std::size_t t = 0; t <= T; ++t) {
    s_min = std::min(s_min, inst.sigma2(t));
    s_max = std::max(s_max, inst.sigma2(t));
    bench_min = std::min(bench_min, d * inst.sigma2(t) / (8.0 * n * c2));
  }
  const double ratio = s_max > 0.0 ? s_min / s_max : 0.0;
  const double inner = std::max(ratio, bench_min) / (2.0 * static_cast<double>(T + 1));
  const double raw = inner * inner;
  return std::min(0.5, std::max(raw, std::numeric_limits<double>::min()));
}

}  // namespace clsim
