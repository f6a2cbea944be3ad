#pragma once

#include <string>

#include "clsim/models.hpp"
#include "clsim/multi_source.hpp"
#include "clsim/oracles.hpp"
#include "clsim/single_source.hpp"

#include <json.hpp>

namespace clsim {

using Json = nlohmann::json;

// Instance wire format:
// {dim, n_budget, c_theta, tasks:[{theta:[...], sigma2, cov_shape?}]}
// with task 0 the target and cov_shape row-major d x d.
Json instance_to_json(const ProblemInstance& inst);
ProblemInstance instance_from_json(const Json& j);
ProblemInstance load_instance(const std::string& path);

Json oracle_report_to_json(const OracleReport& rep);
Json trace_to_json(const EliminationTrace& trace);
Json single_source_outcome_to_json(const SingleSourceOutcome& out);

// {strong_bound, weak_bound, theorem3, theorem4, regime}
struct BoundReport {
  double strong_bound = 0.0;
  double weak_bound = 0.0;
  double theorem3 = 0.0;
  double theorem4 = 0.0;
  std::string regime;
};

BoundReport make_bound_report(const ProblemInstance& inst);
Json bound_report_to_json(const BoundReport& rep);

std::string stop_reason_name(StopReason reason);

}  // namespace clsim
