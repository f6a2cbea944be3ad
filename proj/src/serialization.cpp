#include "clsim/serialization.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>

#include "clsim/lower_bounds.hpp"

namespace clsim {

namespace {

Json vec_to_json(const Vec& v) {
  Json arr = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

Vec vec_from_json(const Json& j) {
  Vec v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  return v;
}

}  // namespace

Json instance_to_json(const ProblemInstance& inst) {
  Json tasks = Json::array();
  for (std::size_t t = 0; t <= inst.num_sources(); ++t) {
    const TaskParams& tp = inst.task(t);
    Json task{{"theta", vec_to_json(tp.theta)}, {"sigma2", tp.sigma2}};
    if (tp.cov_shape) {
      Json flat = Json::array();
      for (Eigen::Index r = 0; r < tp.cov_shape->rows(); ++r)
        for (Eigen::Index c = 0; c < tp.cov_shape->cols(); ++c)
          flat.push_back((*tp.cov_shape)(r, c));
      task["cov_shape"] = flat;
    }
    tasks.push_back(std::move(task));
  }
  return Json{{"dim", inst.dim()},
              {"n_budget", inst.n_budget()},
              {"c_theta", inst.c_theta()},
              {"tasks", tasks}};
}

ProblemInstance instance_from_json(const Json& j) {
  for (const char* key : {"dim", "n_budget", "c_theta", "tasks"})
    if (!j.contains(key)) throw ConfigError(std::string("instance JSON missing field '") + key + "'");
  const std::size_t dim = j.at("dim").get<std::size_t>();
  std::vector<TaskParams> tasks;
  for (const Json& jt : j.at("tasks")) {
    TaskParams tp;
    tp.theta = vec_from_json(jt.at("theta"));
    tp.sigma2 = jt.at("sigma2").get<double>();
    if (jt.contains("cov_shape")) {
      const Json& flat = jt.at("cov_shape");
      if (flat.size() != dim * dim)
        throw ConfigError("cov_shape must be row-major d*d");
      Mat m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
      for (std::size_t r = 0; r < dim; ++r)
        for (std::size_t c = 0; c < dim; ++c)
          m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
              flat[r * dim + c].get<double>();
      tp.cov_shape = std::move(m);
    }
    tasks.push_back(std::move(tp));
  }
  ProblemInstance inst = ProblemInstance::build(std::move(tasks), j.at("n_budget").get<std::int64_t>(),
                                                j.at("c_theta").get<double>());
  if (inst.dim() != dim) throw ConfigError("instance dim field disagrees with theta length");
  return inst;
}

ProblemInstance load_instance(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open instance file: " + path);
  Json j;
  try {
    in >> j;
  } catch (const std::exception& e) {
    throw ConfigError("invalid JSON in " + path + ": " + e.what());
  }
  // Anything wrong with the file's content is a configuration problem.
  try {
    return instance_from_json(j);
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError("invalid instance in " + path + ": " + e.what());
  }
}

Json oracle_report_to_json(const OracleReport& rep) {
  return Json{{"t_star", rep.t_star},     {"strong_set", rep.strong_set},
              {"weak_set", rep.weak_set}, {"strong_bound", rep.strong_bound},
              {"weak_choice", rep.weak_choice}, {"kappa", rep.kappa}};
}

std::string stop_reason_name(StopReason reason) {
  switch (reason) {
    case StopReason::SmallRetained: return "SmallRetained";
    case StopReason::AllEliminated: return "AllEliminated";
    case StopReason::NoProgress: return "NoProgress";
    case StopReason::MaxRounds: return "MaxRounds";
  }
  return "Unknown";
}

Json trace_to_json(const EliminationTrace& trace) {
  Json rounds = Json::array();
  for (const RoundRecord& r : trace.rounds) {
    Json allocations = Json::array();
    for (const auto& [t, n] : r.allocations) allocations.push_back(Json{{"t", t}, {"n", n}});
    Json stats = Json::array();
    for (const auto& [t, s] : r.stats) stats.push_back(Json{{"t", t}, {"stat", s}});
    Json jr{{"retained_before", r.retained_before},
            {"allocations", allocations},
            {"stats", stats},
            {"threshold", r.threshold},
            {"eliminated", r.eliminated}};
    if (r.stop_reason) jr["stop_reason"] = stop_reason_name(*r.stop_reason);
    rounds.push_back(std::move(jr));
  }
  Json j{{"rounds", rounds},
         {"t_alg", trace.t_alg},
         {"t_star", trace.t_star},
         {"final_estimate", vec_to_json(trace.final_estimate)},
         {"samples_used", trace.samples_used},
         {"n_bar", trace.n_bar},
         {"delta_bar", trace.delta_bar}};
  if (!trace.sigma2_hat.empty()) j["sigma2_hat"] = trace.sigma2_hat;
  return j;
}

Json single_source_outcome_to_json(const SingleSourceOutcome& out) {
  return Json{{"estimate", vec_to_json(out.estimate)},
              {"chose_source", out.chose_source},
              {"threshold", out.threshold},
              {"stat", out.stat},
              {"delta_used", out.delta_used}};
}

BoundReport make_bound_report(const ProblemInstance& inst) {
  BoundReport rep;
  rep.strong_bound = task_benchmark(inst, strong_oracle_index(inst));
  rep.weak_bound = weak_oracle_bound(inst, 1.0);

  // Sorted profiles define the localization class for the bounds.
  std::vector<double> q2s;
  for (std::size_t t = 1; t <= inst.num_sources(); ++t) q2s.push_back(inst.q2(t));
  std::sort(q2s.begin(), q2s.end());
  std::vector<double> s2s;
  for (std::size_t t = 0; t <= inst.num_sources(); ++t) s2s.push_back(inst.sigma2(t));
  std::sort(s2s.begin() + 1, s2s.end(), std::greater<double>());

  rep.theorem3 = semi_local_lower_bound(q2s, s2s, inst.n_budget(), inst.dim());
  if (inst.dim() >= 3) {
    const std::size_t t_wo = t_wo_sorted(q2s, s2s, 1.0, inst.n_budget(), inst.dim());
    const double q_wo = t_wo >= 1 ? std::sqrt(q2s[t_wo - 1]) : 0.0;
    LocalizedLowerBound t4 = localized_lower_bound(q_wo, s2s[t_wo], inst.n_budget(), inst.dim());
    rep.theorem4 = t4.value;
    rep.regime = t4.noise_regime ? "noise-dominating" : "distance-dominating";
  } else {
    rep.theorem4 = 0.0;
    rep.regime = "undefined (d < 3)";
  }
  return rep;
}

Json bound_report_to_json(const BoundReport& rep) {
  return Json{{"strong_bound", rep.strong_bound},
              {"weak_bound", rep.weak_bound},
              {"theorem3", rep.theorem3},
              {"theorem4", rep.theorem4},
              {"regime", rep.regime}};
}

}  // namespace clsim
