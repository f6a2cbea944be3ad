#include <doctest.h>

#include <cmath>

#include "clsim/estimators.hpp"
#include "clsim/single_source.hpp"

using namespace clsim;

namespace {

Vec v2(double a, double b) {
  Vec v(2);
  v << a, b;
  return v;
}

Vec random_unit(NormalSource& rng, int d) {
  Vec v(d);
  for (int j = 0; j < d; ++j) v[j] = rng();
  double n = v.norm();
  return n > 0 ? Vec(v / n) : Vec(Vec::Unit(d, 0));
}

}  // namespace

TEST_CASE("eliminate_predicate") {
  CHECK_FALSE(eliminate_predicate(v2(1, 1), v2(1, 1), 1.0));
  // Boundary is inclusive: ||diff||^2 = 10 lambda^2 eliminates.
  CHECK(eliminate_predicate(v2(0, 0), v2(std::sqrt(10.0), 0), 1.0));
  CHECK_FALSE(eliminate_predicate(v2(0, 0), v2(std::sqrt(10.0) - 1e-6, 0), 1.0));
}

TEST_CASE("elimination test is sound on random admissible configurations") {
  // Whenever Q^2 >= 27 lambda_max^2 the predicate fires; the converse band
  // Q^2 <= lambda_max^2 / nu covers every non-eliminated configuration.
  NormalSource rng(61);
  const double nu = 1.0 / 27.0;
  int checked_hits = 0;
  for (int trial = 0; trial < 20000; ++trial) {
    const int d = trial % 2 == 0 ? 2 : 5;
    Vec theta0(d), theta1(d);
    for (int j = 0; j < d; ++j) {
      theta0[j] = 3.0 * rng();
      theta1[j] = 3.0 * rng();
    }
    double lambda0 = 0.01 + 2.0 * rng.uniform_open();
    double lambda1 = 0.01 + 2.0 * rng.uniform_open();
    double lmax2 = std::max(lambda0, lambda1) * std::max(lambda0, lambda1);
    Vec t0 = theta0 + lambda0 * rng.uniform_open() * random_unit(rng, d);
    Vec t1 = theta1 + lambda1 * rng.uniform_open() * random_unit(rng, d);
    double q2 = (theta1 - theta0).squaredNorm();
    bool eliminated = eliminate_predicate(t0, t1, lmax2);
    if (q2 >= 27.0 * lmax2) {
      CHECK(eliminated);
      ++checked_hits;
    }
    if (eliminated) CHECK(q2 >= nu * lmax2);
    if (!eliminated) CHECK(q2 <= lmax2 / nu);
  }
  CHECK(checked_hits > 100);  // the generator actually exercises the far case
}

TEST_CASE("run_single_source in the vanishing-noise limit") {
  // A fully noiseless pair sigma0^2 = sigma1^2 = 0 is unconstructible under
  // the strict sigma_t^2 < sigma0^2 instance invariant, so the degenerate
  // behavior is pinned with a noiseless source and a vanishing target noise.
  GFunction g{4.0};

  SUBCASE("noiseless source at the target is kept and recovers theta0 exactly") {
    ProblemInstance inst = build_instance({v2(1, 2), v2(1, 2)}, {1e-12, 0.0}, 100, 10.0);
    BudgetedSampler sampler(inst, 1);
    SingleSourceOutcome out = run_single_source(inst, sampler, 0.05, g);
    CHECK(out.chose_source);
    CHECK(out.estimate == v2(1, 2));
  }

  SUBCASE("any positive distance beats a vanishing threshold") {
    ProblemInstance inst = build_instance({v2(0, 0), v2(0.5, 0)}, {1e-12, 0.0}, 100, 10.0);
    BudgetedSampler sampler(inst, 1);
    SingleSourceOutcome out = run_single_source(inst, sampler, 0.05, g);
    CHECK_FALSE(out.chose_source);
    CHECK(out.stat >= out.threshold);
    // The target estimate is kept, up to its vanishing sampling noise
    // (per-coordinate sd of theta0_hat is sqrt(1e-12 / 50)).
    CHECK(squared_error(out.estimate, v2(0, 0)) < 1e-12);
  }
}

TEST_CASE("run_single_source consumes exactly 2*floor(N/2) samples") {
  ProblemInstance inst = build_instance({v2(0, 0), v2(0, 0)}, {10.0, 1.0}, 101, 10.0);
  BudgetedSampler sampler(inst, 2);
  GFunction g{4.0};
  run_single_source(inst, sampler, 0.05, g);
  CHECK(sampler.drawn_total() == 100);
  CHECK(sampler.drawn_per_task(0) == 50);
  CHECK(sampler.drawn_per_task(1) == 50);
  CHECK_THROWS_AS(run_single_source(inst, sampler, 2.0, g), DeltaOutOfRange);
}

TEST_CASE("estimate is bitwise one of the two initial empirical means") {
  ProblemInstance inst = build_instance({v2(0, 0), v2(0.1, 0.1)}, {10.0, 1.0}, 1000, 10.0);
  GFunction g{4.0};
  BudgetedSampler sampler(inst, 17);
  SingleSourceOutcome out = run_single_source(inst, sampler, 0.05, g);

  BudgetedSampler replay(inst, 17);
  Vec mean0 = empirical_mean(replay.draw(0, 500));
  Vec mean1 = empirical_mean(replay.draw(1, 500));
  CHECK(out.stat == squared_error(mean0, mean1));
  if (out.chose_source)
    CHECK(out.estimate == mean1);
  else
    CHECK(out.estimate == mean0);
}

TEST_CASE("never worse than target-only sampling at the reference settings") {
  ProblemInstance inst = build_instance({v2(0, 0), v2(0, 0)}, {10.0, 1.0}, 1000, 10.0);
  GFunction g{1.01};
  double loss_alg = 0.0, loss_target = 0.0;
  for (std::uint64_t rep = 0; rep < 500; ++rep) {
    BudgetedSampler s1(inst, 1000 + rep, false);
    loss_alg += squared_error(run_single_source(inst, s1, 0.05, g).estimate, inst.task(0).theta);
    BudgetedSampler s2(inst, 50000 + rep, false);
    loss_target += squared_error(empirical_mean(s2.draw(0, 1000)), inst.task(0).theta);
  }
  CHECK(loss_alg <= 3.0 * loss_target);
}

TEST_CASE("delta_star_single") {
  SUBCASE("variance-ratio term dominating") {
    // sigma1^2 = sigma0^2/3 gives first term exactly 1/4; third term tiny.
    ProblemInstance inst = build_instance({v2(0, 0), v2(0, 0)}, {3.0, 1.0}, 10000, 10.0);
    DeltaStar ds = delta_star_single(inst);
    CHECK(ds.value == doctest::Approx(1.0 / 16.0));
    CHECK_FALSE(ds.clamped);
  }

  SUBCASE("third term above one clamps to 0.5") {
    ProblemInstance inst = build_instance({v2(0, 0), v2(0, 0)}, {8.0, 1.0}, 1, 1.0);
    DeltaStar ds = delta_star_single(inst);
    CHECK(ds.raw == doctest::Approx(4.0));
    CHECK(ds.clamped);
    CHECK(ds.value == 0.5);
  }

  SUBCASE("matches a direct recomputation") {
    ProblemInstance inst = build_instance({v2(0, 0), v2(1, 1)}, {5.0, 2.0}, 300, 7.0);
    double inner = std::max({2.0 / 7.0, 0.25, 2.0 * 5.0 / (8.0 * 49.0 * 300.0)});
    CHECK(delta_star_single(inst).value == doctest::Approx(inner * inner));
  }
}

TEST_CASE("high-probability loss guarantee at the reference settings (reduced reps)") {
  const double d = 2.0, n = 1000.0, sigma0_2 = 10.0, sigma1_2 = 1.0, delta = 0.05;
  GFunction g{1.01};
  const double nu = 1.0 / 27.0;
  for (double q2 : {0.0, d * sigma0_2 / n, 10.0 * d * sigma0_2 / n}) {
    ProblemInstance inst =
        build_instance({v2(0, 0), v2(std::sqrt(q2), 0)}, {sigma0_2, sigma1_2}, 1000, 10.0);
    const double bound = 8.0 * g(delta / 2.0) / nu *
                         std::min(q2 + d * sigma1_2 / n, d * sigma0_2 / n);
    int hold = 0;
    for (std::uint64_t rep = 0; rep < 100; ++rep) {
      BudgetedSampler sampler(inst, 7000 + rep, false);
      SingleSourceOutcome out = run_single_source(inst, sampler, delta, g);
      if (squared_error(out.estimate, inst.task(0).theta) <= bound) ++hold;
    }
    CHECK(hold >= 95);
  }
}
