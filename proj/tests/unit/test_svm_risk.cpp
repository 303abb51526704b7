#include <doctest.h>

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "../helpers.hpp"
#include "../oracle.hpp"

using namespace vslab;
using testing::vec;

namespace {

Vector ones_deltas(int n) { return Vector::Ones(n); }

}  // namespace

TEST_CASE("cs-svm on hand-built geometries") {
  SUBCASE("two orthonormal points") {
    const Matrix z = Matrix::Identity(2, 2);
    const SvmSolution sol = solve_cs_svm(z, ones_deltas(2));
    CHECK(sol.w.w.isApprox(vec({1, 1}), 1e-9));
    CHECK(sol.active_set[0]);
    CHECK(sol.active_set[1]);
    CHECK(certify_kkt(z, ones_deltas(2), sol).max_violation() <= 1e-8);
  }
  SUBCASE("single point with margin scale one half") {
    Matrix z(1, 2);
    z << 2.0, 0.0;
    const SvmSolution sol = solve_cs_svm(z, vec({0.5}));
    CHECK(sol.w.w.isApprox(vec({1, 0}), 1e-9));
  }
  SUBCASE("a zero row cannot be separated") {
    Matrix z = Matrix::Zero(2, 3);
    z(0, 0) = 1.0;
    CHECK_THROWS_AS(solve_cs_svm(z, ones_deltas(2)), NonSeparableError);
  }
  SUBCASE("opposite points cannot be separated") {
    Matrix z(2, 2);
    z << 1.0, 0.0, -1.0, 0.0;
    CHECK_THROWS_AS(solve_cs_svm(z, ones_deltas(2)), NumericalError);
  }
}

TEST_CASE("cs-svm matches the exhaustive active-set oracle") {
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    CAPTURE(seed);
    RngStream rng(seed, 99);
    const int n = 6;
    const int d = 40;
    Matrix z(n, d);
    for (int i = 0; i < n; ++i) {
      Vector row(d);
      rng.fill_normal(row);
      z.row(i) = row.transpose();
    }
    z.col(0).array() += 2.0;
    Vector deltas(n);
    for (int i = 0; i < n; ++i) deltas(i) = 0.2 + rng.uniform();
    const auto ref = oracle::brute_force_svm(z, deltas);
    REQUIRE(ref);
    const SvmSolution sol = solve_cs_svm(z, deltas);
    CHECK(std::abs(sol.norm() - ref->norm) / ref->norm <= 1e-6);
    CHECK(certify_kkt(z, deltas, sol).max_violation() <= 1e-8);
  }
}

TEST_CASE("min-norm interpolation") {
  SUBCASE("single equation") {
    Matrix z(1, 2);
    z << 2.0, 0.0;
    const MinNormResult r = min_norm_solve(z, vec({0.5}));
    CHECK(r.w.w.isApprox(vec({1, 0}), 1e-12));
  }
  SUBCASE("orthonormal rows") {
    const Matrix z = Matrix::Identity(3, 5);
    const MinNormResult r = min_norm_solve(z, ones_deltas(3));
    CHECK(r.w.w.isApprox(vec({1, 1, 1, 0, 0}), 1e-12));
  }
  SUBCASE("a rank-deficient system is refused") {
    Matrix z(2, 3);
    z << 1, 2, 3, 2, 4, 6;
    CHECK_THROWS_AS(min_norm_solve(z, ones_deltas(2)), RankDeficiencyError);
  }
}

TEST_CASE("min-norm and cs-svm coincide when every point is a support vector") {
  ProblemConfig pc;
  pc.d = 2000;
  pc.n = 50;
  pc.tau = 4;
  const ProblemSpec s = problem_spec(pc);
  const Dataset ds = sample_dataset(s, 1);
  const VsLossParams p = tune_vs_defaults(s.n_plus, s.n_minus);
  const SvmSolution sol = solve_cs_svm(ds, p.delta);
  const Classifier mn = min_norm_interpolator(ds, p.delta);
  CHECK((mn.w - sol.w.w).norm() / sol.w.w.norm() <= 1e-6);
  const Vector m = scaled_margins(ds, p.delta, sol.w);
  CHECK(m.maxCoeff() - m.minCoeff() <= 1e-6 * m.mean());
  CHECK(m.mean() == doctest::Approx(1.0 / sol.norm()));
  CHECK(scaled_margins(ds, p.delta, Classifier{3.0 * sol.w.w}).isApprox(m, 1e-12));
}

TEST_CASE("on the d=4096 preset not every point is a support vector") {
  // Pilot: roughly half of the constraints are active, so the interpolator has a
  // strictly larger norm than the max-margin solution.
  const ProblemSpec s = testing::fig2_spec(4096);
  const Dataset ds = sample_dataset(s, 1);
  const VsLossParams p = tune_vs_defaults(s.n_plus, s.n_minus);
  const SvmSolution sol = solve_cs_svm(ds, p.delta);
  const Classifier mn = min_norm_interpolator(ds, p.delta);
  CHECK(mn.w.norm() >= sol.norm());
  CHECK(scaled_margins(ds, p.delta, mn).minCoeff() * mn.w.norm() == doctest::Approx(1.0));
  CHECK(certify_kkt(ds, p.delta, sol).max_violation() <= 1e-8);
}

TEST_CASE("q function") {
  CHECK(q_function(0.0) == 0.5);
  CHECK(q_function(-0.7) == doctest::Approx(1.0 - q_function(0.7)).epsilon(1e-15));
  CHECK(std::abs(q_function(1.0) - 0.1586553) <= 1e-7);
  CHECK(q_function(37.0) > 0.0);
  CHECK(q_function(-40.0) == 1.0);
  CHECK_THROWS_AS(q_function(std::nan("")), NumericalError);
}

TEST_CASE("q function against the shipped high-precision table") {
  std::ifstream in(VSLAB_FIXTURE_DIR "/q_table.csv");
  REQUIRE(in);
  std::string line;
  int rows = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line[0] == 'x') continue;
    const auto comma = line.find(',');
    const double x = std::stod(line.substr(0, comma));
    const double q = std::stod(line.substr(comma + 1));
    CAPTURE(x);
    CHECK(std::abs(q_function(x) - q) <= 1e-10);
    if (q > 1e-300) CHECK(std::abs(q_function(x) - q) <= 1e-12 * q);
    ++rows;
  }
  CHECK(rows >= 80);
}

TEST_CASE("worst-group error in closed form") {
  Vector mc = Vector::Zero(2);
  mc(0) = 1.5;
  Vector ms = Vector::Zero(2);
  ms(0) = 1.5;
  const ProblemSpec s = testing::make_spec(mc, ms, 1, 1);
  const NuPair nu = build_nu(s);

  const ErrorReport r1 = worst_group_error(Classifier{nu.plus}, nu.plus, nu.minus);
  CHECK(r1.corr_minus == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(r1.wst_error == doctest::Approx(0.5));

  const ErrorReport r2 = worst_group_error(Classifier{nu.plus + nu.minus}, nu.plus, nu.minus);
  CHECK(r2.corr_plus == doctest::Approx(1.5));
  CHECK(r2.corr_minus == doctest::Approx(1.5));
  CHECK(r2.wst_error == doctest::Approx(q_function(1.5)));

  const Vector w = vec({0.3, -1, 2, 0.1});
  const double base = worst_group_error(Classifier{w}, nu.plus, nu.minus).wst_error;
  for (double c : {1e-6, 0.5, 3.0, 1e8})
    CHECK(worst_group_error(Classifier{c * w}, nu.plus, nu.minus).wst_error ==
          doctest::Approx(base).epsilon(1e-12));
  CHECK_THROWS(worst_group_error(Classifier{Vector::Zero(4)}, nu.plus, nu.minus));
}

TEST_CASE("monte carlo error") {
  const ProblemSpec s = testing::make_spec(vec({3, 0}), vec({3, 0}), 1, 1);
  const NuPair nu = build_nu(s);
  SUBCASE("huge margin gives zero error") {
    const ProblemSpec big = testing::make_spec(vec({40, 0}), vec({0, 0}), 1, 1);
    const McEstimate mc = monte_carlo_error(Classifier{build_nu(big).plus}, big, 1000, 1);
    CHECK(mc.err_plus == 0.0);
  }
  SUBCASE("orthogonal classifier is a coin flip") {
    const McEstimate mc = monte_carlo_error(Classifier{vec({0, 1, 0, 0})}, s, 20000, 2);
    CHECK(std::abs(mc.err_plus - 0.5) <= mc.radius_plus);
  }
  SUBCASE("agreement with the analytic error") {
    int inside = 0;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      RngStream rng(seed, 7);
      Vector w(4);
      rng.fill_normal(w);
      w += 0.3 * nu.plus;
      const ErrorReport r = worst_group_error(Classifier{w}, nu.plus, nu.minus);
      const McEstimate mc = monte_carlo_error(Classifier{w}, s, 20000, seed);
      inside += std::abs(r.wst_error - mc.wst_error()) <= mc.wst_radius();
    }
    CHECK(inside >= 18);
  }
  SUBCASE("too few draws are refused") {
    CHECK_THROWS_AS(monte_carlo_error(Classifier{nu.plus}, s, 10, 1), ConfigError);
  }
}

TEST_CASE("bound evaluators") {
  CHECK(eval_vs_upper_bound(100, 10000, 1.0) == doctest::Approx(0.15866).epsilon(1e-4));
  double prev = 0.0;
  for (double d : {1e2, 1e4, 1e6, 1e8, 1e12}) {
    const double v = eval_vs_upper_bound(10, d);
    CHECK(v > prev);
    prev = v;
  }
  CHECK(prev == doctest::Approx(0.5).epsilon(1e-4));
  for (int k = 0; k < 4; ++k) {
    const double d1 = std::pow(4.0, 4 + k);
    const double d2 = 4 * d1;
    CHECK(eval_vs_upper_bound(std::pow(d2, 0.6) / 4, d2) < eval_vs_upper_bound(std::pow(d1, 0.6) / 4, d1));
  }

  const double la = eval_la_lower_bound(100, 0, 100, 10000, 10, 0.01, 1.0, 1.0);
  CHECK(la == doctest::Approx(q_function(10 * (0.1 + std::sqrt(std::log(1e4) / 100)))).epsilon(1e-9));
  CHECK(la == doctest::Approx(2.7e-5).epsilon(0.05));
  CHECK(eval_la_lower_bound(100, 0, 100, 10000, 1e12, 0.01, 1.0, 0.0) == doctest::Approx(0.5).epsilon(1e-3));
  CHECK(eval_la_lower_bound(100, 0, 100, 40000, 10, 0.01) > la);

  CHECK(eval_benign_bound(0.0, 100, 10000) == doctest::Approx(eval_vs_upper_bound(100, 10000)));
  CHECK(eval_benign_bound(0.1, 1e8, 100) == doctest::Approx(0.1));
  // A negative constant pushes the Q part to 0.6; the sum is capped at 1.
  const double c = -0.2533471031357997;
  CHECK(eval_vs_upper_bound(1.0, 1.0, c) == doctest::Approx(0.6).epsilon(1e-9));
  CHECK(eval_benign_bound(0.5, 1.0, 1.0, c) == 1.0);
}
