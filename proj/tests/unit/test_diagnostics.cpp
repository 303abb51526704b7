#include <doctest.h>

#include <cmath>

#include "../helpers.hpp"

using namespace vslab;
using testing::vec;

TEST_CASE("same-group alignment flag on a hand-built sample") {
  Matrix z(1, 2);
  z << 3.0, 0.0;
  Dataset ds = testing::manual_dataset(z, Eigen::VectorXi::Ones(1));
  REQUIRE(ds.nu.plus.squaredNorm() == 1.0);
  const GoodEventReport r = good_event_check(ds, DiagnosticsConfig{});
  CHECK_FALSE(r.same_group.pass);
  CHECK_FALSE(r.overall);
  CHECK(r.pairwise.pass);
  CHECK(r.pairwise.instances == 0);
}

TEST_CASE("good event rate on the Fig. 2 preset") {
  // Pilot over seeds 1..50: the same-group band R+/2 is about three noise
  // standard deviations at d=4096, so roughly half of the seeds clear it.
  // At d=16384 every seed passes.
  DiagnosticsConfig cfg;
  int ok_4096 = 0;
  int ok_16384 = 0;
  for (std::uint64_t seed = 1; seed <= 50; ++seed) {
    ok_4096 += good_event_check(sample_dataset(testing::fig2_spec(4096), seed), cfg).overall;
    if (seed <= 10)
      ok_16384 += good_event_check(sample_dataset(testing::fig2_spec(16384), seed), cfg).overall;
  }
  CHECK(ok_4096 >= 20);
  CHECK(ok_16384 == 10);
}

TEST_CASE("smallest c1 is reported for each inequality") {
  const Dataset ds = sample_dataset(testing::fig2_spec(1024), 1);
  const GoodEventReport r = good_event_check(ds, DiagnosticsConfig{});
  CHECK(r.norm_upper.required_c1 >= 1.0);
  DiagnosticsConfig tight;
  tight.c1 = r.pairwise.required_c1 * (1 + 1e-9);
  CHECK(good_event_check(ds, tight).pairwise.pass);
  tight.c1 = std::max(1.0, r.pairwise.required_c1 * 0.999);
  if (r.pairwise.required_c1 > 1.0) CHECK_FALSE(good_event_check(ds, tight).pairwise.pass);
}

TEST_CASE("assumption arithmetic") {
  DiagnosticsConfig cfg;
  Vector mc = Vector::Zero(1);
  mc(0) = std::sqrt(50.0);
  ProblemSpec s = testing::make_spec(mc, Vector::Zero(1), 100, 100);
  const AssumptionReport r = assumption_check(s, 2, cfg);
  CHECK(r.a);
  CHECK(10 * std::log(20.0) == doctest::Approx(29.96).epsilon(1e-3));
  CHECK_FALSE(r.b);
  CHECK(10 * std::log(4000.0) == doctest::Approx(82.9).epsilon(1e-3));

  const AssumptionReport fig2 = assumption_check(testing::fig2_spec(16384), 16384, cfg);
  CHECK_FALSE(fig2.d);
  CHECK_FALSE(fig2.all());
}

TEST_CASE("separability witness") {
  SUBCASE("shared core blocks") {
    Matrix z(2, 4);
    z << 1, 0, 0.5, 0, 1, 0, -2, 1;
    const Dataset ds = testing::manual_dataset(z, Eigen::VectorXi::Ones(2));
    const SeparabilityWitness w = separability_witness(ds);
    CHECK(w.w_tilde.w.isApprox(vec({2, 0, 0, 0})));
    CHECK(w.min_margin == doctest::Approx(1.0));
  }
  SUBCASE("noiseless samples") {
    const ProblemSpec s = testing::make_spec(vec({2, 1}), vec({1, 0}), 3, 2);
    Dataset ds = sample_dataset(s, 1);
    for (int i = 0; i < ds.n(); ++i) ds.z.row(i) = ds.nu[ds.b(i)].transpose();
    const SeparabilityWitness w = separability_witness(ds);
    const double core = s.mu_core.squaredNorm();
    CHECK(w.min_margin == doctest::Approx(core * ds.n() / w.w_tilde.w.norm()));
    CHECK(w.separable);
  }
  SUBCASE("preset at d=4096 across seeds") {
    int separable = 0;
    int wide = 0;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
      const SeparabilityWitness w = separability_witness(sample_dataset(testing::fig2_spec(4096), seed));
      separable += w.separable;
      wide += w.min_margin >= 0.1 * w.reference_scale;
    }
    CHECK(separable >= 48);
    CHECK(wide >= 48);
  }
}

TEST_CASE("ratio monitor at initialization") {
  const ProblemSpec s = testing::fig2_spec(256);
  const Dataset ds = sample_dataset(s, 1);
  const Classifier zero{Vector::Zero(ds.d())};

  const VsLossParams vs = tune_vs_defaults(s.n_plus, s.n_minus);
  const RatioSeries r = ratio_monitor({grad_summary(vs, ds, zero).log_derivs}, ds.b, vs.delta);
  CHECK(r.normalized.front() == doctest::Approx(1.0).epsilon(1e-14));

  const VsLossParams la = tune_la(s.n_plus, s.n_minus, 1.0);
  const RatioSeries rl = ratio_monitor({grad_summary(la, ds, zero).log_derivs}, ds.b, la.delta);
  const double a = la.omega.plus * std::exp(la.iota.plus);
  const double b = la.omega.minus * std::exp(la.iota.minus);
  CHECK(rl.normalized.front() == doctest::Approx(std::max(a, b) / std::min(a, b)));
}

TEST_CASE("margin equality") {
  const ProblemSpec s = testing::fig2_spec(256, 4);
  const Dataset ds = sample_dataset(s, 1);
  const VsLossParams p = tune_vs_defaults(s.n_plus, s.n_minus);
  CHECK_FALSE(margin_equality_check(ds, p.delta, Classifier{ds.nu.plus}, 1e-2).pass);

  Matrix z(1, 2);
  z << 1.0, 2.0;
  const Dataset single = testing::manual_dataset(z, Eigen::VectorXi::Ones(1));
  CHECK(margin_equality_check(single, {1, 1}, Classifier{vec({1, 1})}, 1e-12).spread == 0.0);

  ProblemConfig pc;
  pc.d = 2000;
  pc.n = 50;
  pc.tau = 4;
  const ProblemSpec sv = problem_spec(pc);
  const Dataset all_active = sample_dataset(sv, 1);
  const VsLossParams pv = tune_vs_defaults(sv.n_plus, sv.n_minus);
  const SvmSolution sol = solve_cs_svm(all_active, pv.delta);
  CHECK(margin_equality_check(all_active, pv.delta, sol.w, 1e-6).pass);
}

TEST_CASE("comparison constant and envelope") {
  const double c = comparison_constant(std::log(3.0), std::log(1.0), 0.0, 1.0, 10.0);
  CHECK(c == doctest::Approx(std::min(0.5 * 0.75 - 0.1 * 0.25, 0.5 * 0.25 - 0.1 * 0.75)));
  CHECK_THROWS_AS(validate(DiagnosticsConfig{0.5}), ConfigError);
}
