#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "clsim/oracles.hpp"

using namespace clsim;

namespace {

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

ProblemInstance random_instance(std::uint64_t seed, std::size_t T) {
  NormalSource rng(seed);
  std::vector<Vec> thetas{v2(rng(), rng())};
  std::vector<double> sigma2s{4.0};
  for (std::size_t t = 0; t < T; ++t) {
    thetas.push_back(v2(2.0 * rng(), 2.0 * rng()));
    sigma2s.push_back(0.1 + 3.0 * rng.uniform_open());
  }
  return build_instance(thetas, sigma2s, 500, 100.0);
}

}  // namespace

TEST_CASE("strong_oracle_index") {
  // d sigma^2/N + Q^2: target 0.2 vs source 0.02.
  ProblemInstance forced = build_instance({v2(0, 0), v2(0, 0)}, {10.0, 1.0}, 100, 10.0);
  CHECK(strong_oracle_index(forced) == 1);

  ProblemInstance far = build_instance({v2(0, 0), v2(50, 0), v2(0, 50)}, {10.0, 1.0, 1.0},
                                       100, 100.0);
  CHECK(strong_oracle_index(far) == 0);

  SUBCASE("matches exhaustive scan on random instances") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      ProblemInstance inst = random_instance(seed, 6);
      std::size_t best = 0;
      for (std::size_t t = 0; t <= 6; ++t)
        if (task_benchmark(inst, t) < task_benchmark(inst, best)) best = t;
      CHECK(strong_oracle_index(inst) == best);
    }
  }
}

TEST_CASE("strong_oracle_set") {
  ProblemInstance inst = random_instance(1, 6);
  CHECK_THROWS_AS(strong_oracle_set(inst, 0.5), KappaBelowOne);

  std::vector<std::size_t> exact = strong_oracle_set(inst, 1.0);
  CHECK(std::count(exact.begin(), exact.end(), strong_oracle_index(inst)) == 1);

  CHECK(strong_oracle_set(inst, 1e12).size() == 7);  // everything

  SUBCASE("brute-force filter at kappa=2") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      ProblemInstance r = random_instance(seed, 5);
      double cutoff = 2.0 * task_benchmark(r, strong_oracle_index(r));
      std::vector<std::size_t> expect;
      for (std::size_t t = 0; t <= 5; ++t)
        if (task_benchmark(r, t) <= cutoff) expect.push_back(t);
      CHECK(strong_oracle_set(r, 2.0) == expect);
    }
  }

  SUBCASE("nesting in kappa") {
    std::vector<std::size_t> small = strong_oracle_set(inst, 1.5);
    std::vector<std::size_t> large = strong_oracle_set(inst, 3.0);
    CHECK(std::includes(large.begin(), large.end(), small.begin(), small.end()));
  }
}

TEST_CASE("weak_oracle_set") {
  // Threshold kappa d sigma0^2 / N = 0.02.
  ProblemInstance inst = build_instance(
      {v2(0, 0), v2(0.1, 0), v2(std::sqrt(0.05), 0)}, {10.0, 1.0, 1.0}, 1000, 10.0);
  CHECK(weak_oracle_set(inst, 1.0) == std::vector<std::size_t>{1});

  ProblemInstance all_zero =
      build_instance({v2(0, 0), v2(0, 0), v2(0, 0)}, {10.0, 1.0, 2.0}, 1000, 10.0);
  CHECK(weak_oracle_set(all_zero, 1.0) == std::vector<std::size_t>{1, 2});

  SUBCASE("brute-force agreement and nesting") {
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
      ProblemInstance r = random_instance(seed, 5);
      double cutoff = 0.7 * 2.0 * r.sigma2(0) / 500.0;
      std::vector<std::size_t> expect;
      for (std::size_t t = 1; t <= 5; ++t)
        if (r.q2(t) <= cutoff) expect.push_back(t);
      CHECK(weak_oracle_set(r, 0.7) == expect);
      std::vector<std::size_t> wider = weak_oracle_set(r, 1.4);
      CHECK(std::includes(wider.begin(), wider.end(), expect.begin(), expect.end()));
    }
  }
}

TEST_CASE("select_t_bar") {
  ProblemInstance inst = build_instance(
      {v2(0, 0), v2(std::sqrt(0.1), 0), v2(std::sqrt(0.2), 0)}, {10.0, 1.0, 1.0}, 1000, 10.0);
  CHECK(select_t_bar(inst, {}) == 0);
  CHECK(select_t_bar(inst, {1, 2}) == 2);  // equal variances: maximal Q^2 wins

  ProblemInstance varied = build_instance(
      {v2(0, 0), v2(std::sqrt(0.1), 0), v2(std::sqrt(0.2), 0)}, {10.0, 0.5, 1.0}, 1000, 10.0);
  CHECK(select_t_bar(varied, {1, 2}) == 1);  // unique variance minimizer

  ProblemInstance tied = build_instance({v2(0, 0), v2(1, 0), v2(1, 0)}, {10.0, 1.0, 1.0},
                                        1000, 10.0);
  CHECK(select_t_bar(tied, {1, 2}) == 1);  // full tie: lowest index

  SUBCASE("always returns a member of a nonempty set") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      ProblemInstance r = random_instance(seed, 5);
      std::vector<std::size_t> set{2, 4, 5};
      std::size_t chosen = select_t_bar(r, set);
      CHECK(std::count(set.begin(), set.end(), chosen) == 1);
    }
  }
}

TEST_CASE("run_weak_oracle") {
  SUBCASE("empty weak set samples the target only") {
    ProblemInstance inst =
        build_instance({v2(0, 0), v2(5, 0)}, {10.0, 1.0}, 1000, 10.0);
    BudgetedSampler sampler(inst, 1);
    auto [estimate, report] = run_weak_oracle(inst, sampler, 1.0);
    CHECK(report.weak_set.empty());
    CHECK(report.weak_choice == 0);
    CHECK(sampler.drawn_per_task(0) == 1000);
    CHECK(sampler.drawn_per_task(1) == 0);
  }

  SUBCASE("noiseless chosen source at Q=0 recovers theta0 exactly") {
    ProblemInstance inst =
        build_instance({v2(1, 2), v2(1, 2)}, {10.0, 0.0}, 1000, 10.0);
    BudgetedSampler sampler(inst, 1);
    auto [estimate, report] = run_weak_oracle(inst, sampler, 1.0);
    CHECK(report.weak_choice == 1);
    CHECK(estimate == v2(1, 2));
    CHECK(sampler.drawn_total() == 1000);
  }

  SUBCASE("loss concentrates at d sigma^2 / N") {
    ProblemInstance inst =
        build_instance({v2(0, 0), v2(0, 0)}, {1.0, 0.1}, 10000, 10.0);
    double acc = 0.0;
    for (std::uint64_t rep = 0; rep < 200; ++rep) {
      BudgetedSampler sampler(inst, 100 + rep, /*record_history=*/false);
      auto [estimate, report] = run_weak_oracle(inst, sampler, 1.0);
      CHECK(sampler.drawn_per_task(report.weak_choice) == 10000);
      acc += squared_error(estimate, inst.task(0).theta);
    }
    CHECK(acc / 200.0 == doctest::Approx(2.0 * 0.1 / 10000.0).epsilon(0.15));
  }

  SUBCASE("rejects a used sampler") {
    ProblemInstance inst = build_instance({v2(0, 0), v2(0, 0)}, {10.0, 1.0}, 1000, 10.0);
    BudgetedSampler sampler(inst, 1);
    sampler.draw(0, 1);
    CHECK_THROWS_AS(run_weak_oracle(inst, sampler, 1.0), BudgetExceeded);
  }
}

TEST_CASE("oracle report invariants") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    ProblemInstance inst = random_instance(seed, 6);
    OracleReport rep = make_oracle_report(inst, 1.0 + 0.5 * static_cast<double>(seed % 5));
    CHECK(std::count(rep.strong_set.begin(), rep.strong_set.end(), rep.t_star) == 1);
    CHECK(rep.strong_bound == doctest::Approx(task_benchmark(inst, rep.t_star)));
    if (rep.weak_set.empty())
      CHECK(rep.weak_choice == 0);
    else
      CHECK(std::count(rep.weak_set.begin(), rep.weak_set.end(), rep.weak_choice) == 1);
  }
}
