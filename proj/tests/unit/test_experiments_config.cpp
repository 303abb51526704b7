#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "../helpers.hpp"

using namespace vslab;
namespace fs = std::filesystem;

namespace {

SweepGrid tiny_grid() {
  SweepGrid g = fig2_preset(Fig2Variant::fixed_tau);
  g.dims = {64, 128};
  g.seeds = {1, 2, 3};
  g.tau_rule = {TauRule::Kind::fixed, 4.0};
  g.n = 20;
  g.mc_samples = 200;
  return g;
}

fs::path temp_dir(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("vslab_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST_CASE("fig2 preset contents") {
  const SweepGrid fixed = fig2_preset(Fig2Variant::fixed_tau);
  CHECK(fixed.dims == std::vector<int>{256, 1024, 4096, 16384});
  CHECK(fixed.n == 200);
  CHECK(fixed.seeds.size() == 10);
  CHECK(fixed.solver == SolverChoice::cs_svm);
  CHECK(fixed.r_plus_rule.r_plus(256) == doctest::Approx(6.964).epsilon(1e-3));
  CHECK(fixed.tau_rule.tau(4096) == 50.0);
  const SweepGrid growing = fig2_preset(Fig2Variant::growing_tau);
  CHECK(growing.tau_rule.tau(4096) == doctest::Approx(12.13).epsilon(1e-3));
}

TEST_CASE("sweep rows carry the tuned parameters") {
  const std::vector<SweepRow> rows = run_sweep(tiny_grid(), 1);
  int per_seed = 0;
  for (const SweepRow& r : rows) {
    if (r.aggregate) continue;
    ++per_seed;
    CHECK(r.status == "ok");
    if (r.loss == "vs") {
      CHECK(r.params.delta.plus == doctest::Approx(static_cast<double>(r.n_plus) / r.n));
      CHECK(r.params.delta.minus == doctest::Approx(static_cast<double>(r.n_minus) / r.n));
    } else {
      CHECK(r.params.delta.plus == 1.0);
      CHECK(r.params.delta.minus == 1.0);
    }
    REQUIRE(r.kkt_max_violation);
    CHECK(*r.kkt_max_violation <= 1e-8);
  }
  CHECK(per_seed == 2 * 2 * 3);
  int aggregates = 0;
  for (const SweepRow& r : rows) aggregates += r.aggregate;
  CHECK(aggregates == 2 * 2 * 2);
}

TEST_CASE("sweep validation happens before any work") {
  SweepGrid g = tiny_grid();
  g.seeds.clear();
  CHECK_THROWS_AS(run_sweep(g, 1), ConfigError);
  g = tiny_grid();
  g.losses = {LossConfig{"hinge"}};
  CHECK_THROWS_AS(run_sweep(g, 1), ConfigError);
}

TEST_CASE("solver both reports GD and CS-SVM with their cosine") {
  SweepGrid g = tiny_grid();
  g.dims = {64};
  g.seeds = {1};
  g.losses = {LossConfig{"vs"}};
  g.solver = SolverChoice::both;
  g.gd.max_iters = 2000;
  const std::vector<SweepRow> rows = run_sweep(g, 1);
  std::vector<const SweepRow*> point;
  for (const SweepRow& r : rows)
    if (!r.aggregate) point.push_back(&r);
  REQUIRE(point.size() == 2);
  CHECK(point[0]->solver == "cs_svm");
  CHECK(point[1]->solver == "gd");
  for (const SweepRow* r : point) {
    REQUIRE(r->gd_svm_cosine);
    CHECK(*r->gd_svm_cosine > 0.0);
    CHECK(*r->gd_svm_cosine <= 1.0 + 1e-12);
  }
  CHECK(point[1]->gd_iters);
}

TEST_CASE("sweep CSV is identical across worker counts") {
  SweepGrid g = tiny_grid();
  g.solver = SolverChoice::both;
  g.gd.max_iters = 500;
  std::ostringstream a, b;
  write_sweep_csv(run_sweep(g, 1), a);
  write_sweep_csv(run_sweep(g, 8), b);
  CHECK(a.str() == b.str());
  CHECK(a.str().rfind(sweep_csv_header(), 0) == 0);
  CHECK(a.str().find("wall_ms") != std::string::npos);
}

TEST_CASE("plot script references only its sibling data file") {
  const fs::path dir = temp_dir("plot");
  SweepGrid g = tiny_grid();
  g.dims = {64};
  g.seeds = {1};
  const std::vector<SweepRow> rows = run_sweep(g, 1);
  const fs::path script = emit_plot_script(rows, dir, "figure");
  std::ifstream in(script);
  const std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(text.find("\"figure.dat\"") != std::string::npos);
  CHECK(text.find(dir.string()) == std::string::npos);
  CHECK(fs::exists(dir / "figure.dat"));

  const fs::path dir2 = temp_dir("plot2");
  emit_plot_script(rows, dir2, "figure");
  std::ifstream d1(dir / "figure.dat"), d2(dir2 / "figure.dat");
  const std::string s1((std::istreambuf_iterator<char>(d1)), std::istreambuf_iterator<char>());
  const std::string s2((std::istreambuf_iterator<char>(d2)), std::istreambuf_iterator<char>());
  CHECK(s1 == s2);
}

TEST_CASE("print_grid lists one line per dimension and loss") {
  std::ostringstream os;
  print_grid(fig2_preset(Fig2Variant::growing_tau), os);
  const std::string text = os.str();
  CHECK(text.find("16384") != std::string::npos);
  CHECK(std::count(text.begin(), text.end(), '\n') == 1 + 4 * 2);
  CHECK(text.find("seeds=1,2,3,4,5,6,7,8,9,10") != std::string::npos);
}

TEST_CASE("effective config defaults come from the module defaults") {
  const CliConfig c = parse_config(Json::object());
  const GdConfig gd;
  CHECK(c.gd.max_iters == gd.max_iters);
  CHECK(c.gd.stop_direction_tol == gd.stop_direction_tol);
  CHECK(c.gd.stop_window == gd.stop_window);
  CHECK(c.gd.telemetry_stride == gd.telemetry_stride);
  CHECK(c.gd.init_ball_c0 == gd.init_ball_c0);
  CHECK_FALSE(c.gd.step_size);
  const SvmOptions svm;
  CHECK(c.svm.tol == svm.tol);
  CHECK(c.svm.max_passes == svm.max_passes);
  CHECK(c.svm.ceiling_factor == svm.ceiling_factor);
  CHECK(c.svm.active_tol == svm.active_tol);
  CHECK(c.svm.cond_threshold == svm.cond_threshold);
  const DiagnosticsConfig dg;
  CHECK(c.diagnostics.c1 == dg.c1);
  CHECK(c.diagnostics.C == dg.C);
  CHECK(c.diagnostics.delta == dg.delta);
  CHECK(c.diagnostics.kkt_tol == dg.kkt_tol);
  CHECK(c.diagnostics.margin_spread_tol == dg.margin_spread_tol);
  CHECK(c.diagnostics.ratio_ceiling == dg.ratio_ceiling);
  const SweepGrid preset = fig2_preset(Fig2Variant::fixed_tau);
  CHECK(c.sweep.dims == preset.dims);
  CHECK(c.sweep.seeds == preset.seeds);
  CHECK(c.sweep.mc_samples == preset.mc_samples);
  CHECK(c.problem.max_entries == SamplingLimits{}.max_entries);

  // Serialising and re-parsing is the identity.
  CHECK(to_json(parse_config(to_json(c))) == to_json(c));
  CHECK(default_config_json() == to_json(c));
}

TEST_CASE("config parsing errors") {
  CHECK_THROWS_AS(parse_config(Json{{"gd", {{"max_itres", 5}}}}), ConfigError);
  CHECK_THROWS_AS(parse_config(Json{{"bogus", 1}}), ConfigError);
  CHECK_THROWS_AS(parse_config(Json{{"seed", "one"}}), ConfigError);
  CHECK_THROWS_AS(parse_config(Json{{"loss", {{"tuning", "magic"}}}}), ConfigError);
  try {
    load_config("/nonexistent/vslab.json");
    FAIL("expected a ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("/nonexistent/vslab.json") != std::string::npos);
  }
}

TEST_CASE("config sections map onto module inputs") {
  const CliConfig c = parse_config(Json{{"problem", {{"d", 100}, {"n", 10}, {"tau", 4}}},
                                        {"loss", {{"name", "la"}}},
                                        {"gd", {{"step_size", 0.01}}}});
  const ProblemSpec s = problem_spec(c.problem);
  CHECK(s.d() == 100);
  CHECK(s.n_plus == 8);
  CHECK(s.n_minus == 2);
  const VsLossParams p = loss_params(c.loss, s.n_plus, s.n_minus);
  CHECK(p.delta.plus == 1.0);
  CHECK(p.iota.minus == doctest::Approx(-std::log(0.2)));
  CHECK(c.gd.step_size == 0.01);

  const CliConfig manual = parse_config(
      Json{{"loss", {{"tuning", "manual"}, {"delta_plus", 0.7}, {"iota_minus", 1.5}}}});
  const VsLossParams mp = loss_params(manual.loss, 5, 5);
  CHECK(mp.delta.plus == 0.7);
  CHECK(mp.iota.minus == 1.5);

  const CliConfig growing = parse_config(Json{{"sweep", {{"preset", "fig2"}, {"variant", "growing"}}}});
  CHECK(growing.sweep.tau_rule.kind == TauRule::Kind::power);
}
