#include <doctest.h>

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "clsim/experiments.hpp"
#include "clsim/serialization.hpp"

using namespace clsim;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("precision/recall conventions") {
  PrecisionRecall pr = precision_recall({1, 2, 3}, {2, 3, 4, 5});
  CHECK(pr.precision == doctest::Approx(2.0 / 3.0));
  CHECK(pr.recall == doctest::Approx(0.5));
  CHECK_FALSE(pr.empty_retained);

  // Empty retained set: precision 1.0 by convention and flagged.
  PrecisionRecall empty_ret = precision_recall({}, {1, 2});
  CHECK(empty_ret.precision == 1.0);
  CHECK(empty_ret.recall == 0.0);
  CHECK(empty_ret.empty_retained);

  // Empty reference set: recall 1.0 by convention.
  PrecisionRecall empty_ref = precision_recall({1, 2}, {});
  CHECK(empty_ref.recall == 1.0);
  CHECK(empty_ref.precision == 0.0);
}

TEST_CASE("oracle report and single-source outcome serialize with their field names") {
  ProblemInstance inst = build_instance(
      {Vec::Zero(2), Vec::Zero(2)}, {10.0, 1.0}, 1000, 10.0);
  Json j = oracle_report_to_json(make_oracle_report(inst, 1.0));
  for (const char* key :
       {"t_star", "strong_set", "weak_set", "strong_bound", "weak_choice", "kappa"})
    CHECK(j.contains(key));

  BudgetedSampler sampler(inst, 3);
  GFunction g{4.0};
  Json js = single_source_outcome_to_json(run_single_source(inst, sampler, 0.05, g));
  for (const char* key : {"estimate", "chose_source", "threshold", "stat", "delta_used"})
    CHECK(js.contains(key));
}

TEST_CASE("default_r_bar heuristic") {
  CHECK(default_r_bar(2, 1.0, 10.0) == 1);     // log2(0.2) < 0 clamps to 1
  CHECK(default_r_bar(100, 0.1, 1.0) == 4);    // ceil(log2(10))
  CHECK(default_r_bar(100000, 1.0, 1.0) == 10);  // capped
}

TEST_CASE("harness c-const calibrates near the floor for d=2") {
  double c = harness_c_const(2);
  CHECK(c >= 1.01);
  CHECK(c <= 1.2);
}

TEST_CASE("instance builders") {
  ProblemInstance two = two_source_instance(300.0, TwoSourceSweepParams{});
  CHECK(two.num_sources() == 2);
  CHECK(two.q2(2) == doctest::Approx(300.0 * 2.0 * 10.0 / 1000.0));
  CHECK(two.q(1) == 0.0);

  TypeMixtureParams mp;
  ProblemInstance mix = mixture_instance(20, 30, mp);
  CHECK(mix.num_sources() == 100);
  CHECK_THROWS_AS(mixture_instance(80, 30, mp), InfeasibleMixture);

  GammaParams gp;
  ProblemInstance gi = gamma_instance(2.0, gp);
  CHECK(gi.q2(10) == 0.0);
  CHECK(gi.q2(12) == doctest::Approx(4.0 * 2.0 * 1.0 / 100000.0));
}

TEST_CASE("two-source sweep is deterministic and thread-count independent") {
  TwoSourceSweepParams p;
  p.q2_tilde_grid = {0.0, 10.0, 300.0};
  HarnessConfig h;
  h.reps = 20;
  h.master_seed = 5;
  h.threads = 1;
  ExperimentReport a = exp_two_source_sweep(h, p);
  h.threads = 4;
  ExperimentReport b = exp_two_source_sweep(h, p);
  CHECK(csv_string(a) == csv_string(b));
  CHECK(a.rows.size() == 3);

  // Budget audit: no repetition may exceed N.
  for (std::size_t row = 0; row < a.rows.size(); ++row)
    CHECK(a.at(row, "mean_samples_used") <= 1000.0);

  SUBCASE("different seed changes the report") {
    h.master_seed = 6;
    ExperimentReport c = exp_two_source_sweep(h, p);
    CHECK(csv_string(a) != csv_string(c));
  }
}

TEST_CASE("two equivalent sources split the final pick evenly") {
  TwoSourceSweepParams p;
  p.q2_tilde_grid = {0.0};
  HarnessConfig h;
  h.reps = 200;
  h.master_seed = 21;
  ExperimentReport rep = exp_two_source_sweep(h, p);
  const double choose2 = rep.at(0, "choose_task2");
  CHECK(choose2 >= 0.4);
  CHECK(choose2 <= 0.6);
  CHECK(rep.at(0, "choose_task0") == 0.0);
  CHECK(rep.at(0, "choose_task1") + choose2 == doctest::Approx(1.0));
}

TEST_CASE("sweep harness runs in estimated-variance mode") {
  TwoSourceSweepParams p;
  p.q2_tilde_grid = {0.0, 300.0};
  p.n_budget = 10000;
  HarnessConfig h;
  h.reps = 30;
  h.master_seed = 22;
  h.variance_mode = VarianceMode::EstimatedVariance;
  ExperimentReport rep = exp_two_source_sweep(h, p);
  CHECK(rep.rows.size() == 2);
  CHECK(rep.at(1, "choose_task2") <= 0.1);
  CHECK(rep.at(0, "mean_samples_used") <= 10000.0);
}

TEST_CASE("curve report emits tau,beta rows") {
  std::vector<double> q2s(10, 0.0);
  std::vector<double> s2s(10, 1.0);
  CurveSpec spec = make_curve_spec(q2s, s2s, 5.0, 100, 2, 1.0);
  ExperimentReport rep = curve_report(spec);
  CHECK(rep.columns == std::vector<std::string>{"tau", "beta"});
  std::string csv = csv_string(rep);
  CHECK(csv.rfind("tau,beta\n", 0) == 0);
}

TEST_CASE("run_cli") {
  SUBCASE("missing config file names the path and exits 2") {
    int code = run_cli({"two-source-sweep", "--config", "/nonexistent/cfg.json", "--out",
                        "/tmp/clsim_test_sweep"});
    CHECK(code == 2);
  }

  SUBCASE("unknown subcommand exits 2") {
    CHECK(run_cli({"bogus"}) == 2);
  }

  SUBCASE("runtime failures exit 3") {
    ProblemInstance tiny = build_instance(
        {Vec::Zero(2), Vec::Zero(2), Vec::Zero(2)}, {10.0, 1.0, 1.0}, 12, 10.0);
    {
      std::ofstream out("/tmp/clsim_test_tiny.json");
      out << instance_to_json(tiny).dump();
    }
    int code = run_cli({"algorithm1", "--instance", "/tmp/clsim_test_tiny.json", "--rounds",
                        "8", "--out", "/tmp/clsim_test_tinyrun"});
    CHECK(code == 3);
    std::remove("/tmp/clsim_test_tiny.json");
  }

  SUBCASE("help exits 0") {
    CHECK(run_cli({"--help"}) == 0);
  }

  SUBCASE("curve export accepts the flat reference profile") {
    {
      std::ofstream out("/tmp/clsim_test_curvecfg.json");
      out << R"({"params": {"profile_denom": 12.0}})";
    }
    int code = run_cli({"curve-export", "--config", "/tmp/clsim_test_curvecfg.json", "--out",
                        "/tmp/clsim_test_curve12"});
    CHECK(code == 0);
    // Flat profile: beta(1) = 1 (nothing would be eliminated).
    std::string csv = slurp("/tmp/clsim_test_curve12.csv");
    CHECK(csv.find("\n1,1\n") != std::string::npos);
    for (const char* f : {"/tmp/clsim_test_curvecfg.json", "/tmp/clsim_test_curve12.csv",
                          "/tmp/clsim_test_curve12.meta.json"})
      std::remove(f);
  }

  SUBCASE("curve export writes the documented header") {
    int code = run_cli({"curve-export", "--out", "/tmp/clsim_test_curve"});
    CHECK(code == 0);
    std::string csv = slurp("/tmp/clsim_test_curve.csv");
    CHECK(csv.rfind("tau,beta\n", 0) == 0);
    std::remove("/tmp/clsim_test_curve.csv");
    std::remove("/tmp/clsim_test_curve.meta.json");
  }

  SUBCASE("bound-report on an instance file") {
    ProblemInstance inst = build_instance(
        {Vec::Zero(3), Vec::Zero(3)}, {2.0, 1.0}, 200, 10.0);
    {
      std::ofstream out("/tmp/clsim_test_instance.json");
      out << instance_to_json(inst).dump();
    }
    int code = run_cli({"bound-report", "--instance", "/tmp/clsim_test_instance.json", "--out",
                        "/tmp/clsim_test_bounds"});
    CHECK(code == 0);
    Json j;
    std::ifstream in("/tmp/clsim_test_bounds.json");
    in >> j;
    for (const char* key : {"strong_bound", "weak_bound", "theorem3", "theorem4", "regime"})
      CHECK(j.contains(key));
    CHECK(j["strong_bound"].get<double>() <= j["weak_bound"].get<double>() + 1e-12);
    std::remove("/tmp/clsim_test_instance.json");
    std::remove("/tmp/clsim_test_bounds.json");
  }

  SUBCASE("single-source subcommand runs on the default instance") {
    int code = run_cli({"single-source", "--reps", "5", "--out", "/tmp/clsim_test_single"});
    CHECK(code == 0);
    std::string csv = slurp("/tmp/clsim_test_single.csv");
    CHECK(csv.rfind("rep,loss,chose_source,stat,threshold\n", 0) == 0);
    std::remove("/tmp/clsim_test_single.csv");
    std::remove("/tmp/clsim_test_single.meta.json");
  }

  SUBCASE("algorithm1 subcommand writes a trace") {
    ProblemInstance inst = build_instance(
        {Vec::Zero(2), Vec::Zero(2), Vec::Zero(2)}, {10.0, 1.0, 1.0}, 1000, 10.0);
    {
      std::ofstream out("/tmp/clsim_test_instance2.json");
      out << instance_to_json(inst).dump();
    }
    int code = run_cli({"algorithm1", "--instance", "/tmp/clsim_test_instance2.json", "--reps",
                        "2", "--out", "/tmp/clsim_test_alg"});
    CHECK(code == 0);
    Json trace;
    std::ifstream in("/tmp/clsim_test_alg.trace.json");
    REQUIRE(in);
    in >> trace;
    CHECK(trace.contains("rounds"));
    CHECK(trace.contains("t_alg"));
    CHECK(trace.contains("samples_used"));
    for (const char* f : {"/tmp/clsim_test_instance2.json", "/tmp/clsim_test_alg.trace.json",
                          "/tmp/clsim_test_alg.csv", "/tmp/clsim_test_alg.meta.json"})
      std::remove(f);
  }

  SUBCASE("config file supplies parameters") {
    {
      std::ofstream out("/tmp/clsim_test_cfg.json");
      out << R"({"reps": 4, "seed": 9, "params": {"grid": [0.0, 5.0], "n_budget": 500}})";
    }
    int code = run_cli({"two-source-sweep", "--config", "/tmp/clsim_test_cfg.json", "--out",
                        "/tmp/clsim_test_cfgrun"});
    CHECK(code == 0);
    std::string csv = slurp("/tmp/clsim_test_cfgrun.csv");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);  // header + 2 cells
    for (const char* f : {"/tmp/clsim_test_cfg.json", "/tmp/clsim_test_cfgrun.csv",
                          "/tmp/clsim_test_cfgrun.meta.json"})
      std::remove(f);
  }
}
