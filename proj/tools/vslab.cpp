#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "vslab/config.hpp"
#include "vslab/q_reference.hpp"

namespace fs = std::filesystem;
using namespace vslab;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;
constexpr int kExitVerify = 4;

struct Flags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> workers;
  std::optional<std::string> preset;
  std::string variant = "fixed";
  std::optional<std::string> loss;
  std::optional<std::string> tuning;
  std::optional<double> init_norm;
  std::optional<int> mc_samples;
  std::string q_table;
  bool json = false;
  bool dry_run = false;
};

// Reads "x,q" rows; '#' lines and a header row are skipped.
std::vector<QReference> read_q_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open Q table '" + path + "'");
  std::vector<QReference> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#' || line[0] == 'x') continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw ConfigError("malformed Q table row '" + line + "'");
    try {
      rows.push_back({std::stod(line.substr(0, comma)), std::stod(line.substr(comma + 1))});
    } catch (const std::exception&) {
      throw ConfigError("malformed Q table row '" + line + "'");
    }
  }
  if (rows.empty()) throw ConfigError("Q table '" + path + "' has no rows");
  return rows;
}

CliConfig effective_config(const Flags& f) {
  CliConfig c = f.config_path.empty() ? parse_config(Json::object()) : load_config(f.config_path);
  if (f.seed) c.seed = *f.seed;
  if (f.out) c.out = *f.out;
  if (f.workers) {
    c.workers = *f.workers;
  } else if (const char* env = std::getenv("VSLAB_WORKERS")) {
    try {
      c.workers = std::stoi(env);
    } catch (const std::exception&) {
      throw ConfigError(std::string("VSLAB_WORKERS is not an integer: '") + env + "'");
    }
  }
  if (c.workers < 1) throw ConfigError("workers must be at least 1");
  if (f.loss) {
    if (*f.loss != "vs" && *f.loss != "la" && *f.loss != "ce")
      throw ConfigError("--loss must be vs, la or ce");
    c.loss.loss.name = *f.loss;
  }
  if (f.tuning) {
    if (*f.tuning != "paper" && *f.tuning != "manual") throw ConfigError("--tuning must be paper or manual");
    c.loss.tuning = *f.tuning;
  }
  if (f.init_norm) {
    if (*f.init_norm < 0) throw ConfigError("--init-norm must be non-negative");
    c.init.kind = *f.init_norm > 0 ? "random" : "zero";
    c.init.norm = *f.init_norm;
  }
  if (f.mc_samples) {
    c.risk.mc_samples = *f.mc_samples;
    c.sweep.mc_samples = *f.mc_samples;
  }
  if (f.preset) {
    if (*f.preset != "fig2") throw ConfigError("unknown preset '" + *f.preset + "'");
    Fig2Variant v;
    if (f.variant == "fixed")
      v = Fig2Variant::fixed_tau;
    else if (f.variant == "growing")
      v = Fig2Variant::growing_tau;
    else
      throw ConfigError("--variant must be fixed or growing");
    const int mc = c.sweep.mc_samples;
    c.sweep = fig2_preset(v);
    c.sweep.gd = c.gd;
    c.sweep.svm = c.svm;
    if (f.mc_samples) c.sweep.mc_samples = mc;
  }
  return c;
}

fs::path prepare_out(const CliConfig& c) {
  fs::path out(c.out);
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw Error("cannot create output directory '" + out.string() + "': " + ec.message());
  return out;
}

ErrorReport evaluate(const Classifier& w, const Dataset& ds, const CliConfig& c) {
  ErrorReport rep = worst_group_error(w, ds.nu.plus, ds.nu.minus);
  if (c.risk.mc_samples > 0) rep.mc = monte_carlo_error(w, ds.spec, c.risk.mc_samples, c.seed);
  const SnrSummary snr = snr_summary(ds.spec);
  const double d = ds.d();
  rep.bound_evals["vs_upper"] = eval_vs_upper_bound(snr.r_plus, d, c.risk.bound_c);
  if (ds.spec.n_minus > 0) {
    rep.bound_evals["la_lower"] =
        eval_la_lower_bound(snr.r_plus, snr.r_minus, ds.n(), d, *ds.spec.tau(), c.diagnostics.delta,
                            c.risk.bound_c, c.risk.bound_c1);
  }
  if (ds.spec.label_flip_rate > 0) {
    rep.bound_evals["benign_upper"] =
        eval_benign_bound(ds.spec.label_flip_rate, snr.r_plus, d, c.risk.bound_c);
  }
  return rep;
}

void print_report(const ErrorReport& r, std::ostream& os) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-14s %12s %12s\n", "", "b=+1", "b=-1");
  os << buf;
  std::snprintf(buf, sizeof buf, "%-14s %12.6g %12.6g\n", "correlation", r.corr_plus, r.corr_minus);
  os << buf;
  std::snprintf(buf, sizeof buf, "%-14s %12.6g %12.6g\n", "error", r.err_plus, r.err_minus);
  os << buf;
  if (r.mc) {
    std::snprintf(buf, sizeof buf, "%-14s %12.6g %12.6g  (+/- %.3g, %.3g, m=%d)\n", "mc error",
                  r.mc->err_plus, r.mc->err_minus, r.mc->radius_plus, r.mc->radius_minus,
                  r.mc->m_per_group);
    os << buf;
  }
  std::snprintf(buf, sizeof buf, "worst-group error %.6g\n", r.wst_error);
  os << buf;
  for (const auto& [name, v] : r.bound_evals) {
    std::snprintf(buf, sizeof buf, "bound %-12s %.6g  (constant-dependent, not a prediction)\n",
                  name.c_str(), v);
    os << buf;
  }
}

int cmd_config(const Flags& f) {
  std::cout << to_json(effective_config(f)).dump(2) << '\n';
  return kExitOk;
}

int cmd_gen(const Flags& f) {
  const CliConfig c = effective_config(f);
  const ProblemSpec spec = problem_spec(c.problem);
  const Dataset ds = sample_dataset(spec, c.seed, SamplingLimits{c.problem.max_entries});
  const fs::path path = prepare_out(c) / "dataset.txt";
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write '" + path.string() + "'");
  write_dataset(ds, os);
  std::cout << path.string() << '\n';
  return kExitOk;
}

int cmd_train(const Flags& f) {
  const CliConfig c = effective_config(f);
  const ProblemSpec spec = problem_spec(c.problem);
  const Dataset ds = sample_dataset(spec, c.seed, SamplingLimits{c.problem.max_entries});
  const GroupPair<int> counts = ds.observed_counts();
  const VsLossParams params = loss_params(c.loss, counts.plus, counts.minus);
  const Trajectory traj = run_gd(params, ds, gd_config(c, ds.d()));
  for (const std::string& w : traj.warnings) std::cerr << "warning: " << w << '\n';

  const fs::path path = prepare_out(c) / "trajectory.csv";
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error("cannot write '" + path.string() + "'");
  write_trajectory_csv(traj, os);

  const ErrorReport rep = evaluate(traj.final_w, ds, c);
  if (f.json) {
    Json j = {{"loss", to_json(params)},
              {"eta", traj.eta},
              {"iters", traj.iters_run},
              {"converged", traj.converged},
              {"report", to_json(rep)},
              {"trajectory", path.string()}};
    std::cout << j.dump(2) << '\n';
  } else {
    std::cout << "loss " << c.loss.loss.name << " (delta " << params.delta.plus << ", "
              << params.delta.minus << "; iota " << params.iota.plus << ", " << params.iota.minus
              << ")\n";
    std::cout << "iterations " << traj.iters_run << (traj.converged ? " (converged)" : " (max_iters)")
              << ", eta " << traj.eta << '\n';
    print_report(rep, std::cout);
    std::cout << "trajectory " << path.string() << '\n';
  }
  return kExitOk;
}

int cmd_sweep(const Flags& f) {
  const CliConfig c = effective_config(f);
  if (f.dry_run) {
    print_grid(c.sweep, std::cout);
    return kExitOk;
  }
  const fs::path out = prepare_out(c);
  const fs::path csv = out / "sweep.csv";
  const std::vector<SweepRow> rows = run_sweep(c.sweep, csv, c.workers);
  const fs::path script = emit_plot_script(rows, out);
  int failed = 0;
  for (const SweepRow& r : rows)
    if (!r.aggregate && r.status != "ok" && r.status != "max_iters") ++failed;
  if (failed > 0) std::cerr << "warning: " << failed << " sweep points failed; see status column\n";
  std::cout << csv.string() << '\n' << script.string() << '\n';
  return kExitOk;
}

int cmd_verify(const Flags& f) {
  const CliConfig c = effective_config(f);
  Json report;
  bool hard_ok = true;

  // Q-function reference grid.
  const std::vector<QReference> table =
      f.q_table.empty() ? std::vector<QReference>(kQReference.begin(), kQReference.end())
                        : read_q_table(f.q_table);
  double q_err = 0.0;
  for (const QReference& r : table) q_err = std::max(q_err, std::abs(q_function(r.x) - r.q));
  const bool q_ok = q_err <= 1e-10;
  hard_ok = hard_ok && q_ok;
  report["q_grid"] = {{"pass", q_ok}, {"max_abs_error", q_err}};

  const ProblemSpec spec = problem_spec(c.problem);
  const Dataset ds = sample_dataset(spec, c.seed, SamplingLimits{c.problem.max_entries});
  report["good_event"] = to_json(good_event_check(ds, c.diagnostics));
  report["assumptions"] = to_json(assumption_check(spec, ds.d(), c.diagnostics));
  report["separability"] = to_json(separability_witness(ds));

  const GroupPair<int> counts = ds.observed_counts();
  const VsLossParams params = loss_params(c.loss, counts.plus, counts.minus);
  report["loss"] = to_json(params);

  // CS-SVM with its KKT certificate and an active-set min-norm cross-check.
  const SvmSolution sol = solve_cs_svm(ds, params.delta, c.svm);
  const double kkt = certify_kkt(ds, params.delta, sol).max_violation();
  const bool kkt_ok = kkt <= c.diagnostics.kkt_tol;
  hard_ok = hard_ok && kkt_ok;
  report["svm_kkt"] = {{"pass", kkt_ok}, {"max_violation", kkt}, {"passes", sol.passes}};

  const Vector row_deltas = per_sample_deltas(ds.b, params.delta);
  std::vector<int> active;
  for (int i = 0; i < ds.n(); ++i)
    if (sol.active_set[i]) active.push_back(i);
  Matrix za(active.size(), ds.d());
  Vector da(active.size());
  for (std::size_t k = 0; k < active.size(); ++k) {
    za.row(k) = ds.z.row(active[k]);
    da(k) = row_deltas(active[k]);
  }
  const MinNormResult mn = min_norm_solve(za, da, c.svm.cond_threshold);
  const double rel = (mn.w.w - sol.w.w).norm() / sol.w.w.norm();
  const bool oracle_ok = rel <= 1e-6;
  hard_ok = hard_ok && oracle_ok;
  report["oracle_equivalence"] = {{"pass", oracle_ok},
                                  {"relative_l2", rel},
                                  {"support_vectors", active.size()},
                                  {"n", ds.n()}};

  const MarginEquality me = margin_equality_check(ds, params.delta, sol.w, 1e-6);
  report["margin_equality"] = {{"all_support_vectors", me.pass}, {"relative_spread", me.spread}};

  // Normalized derivative ratio at w = 0.
  const GradSummary g0 = grad_summary(params, ds, Classifier{Vector::Zero(ds.d())});
  const double ratio0 =
      ratio_monitor({g0.log_derivs}, ds.b, params.delta).normalized.front();
  report["ratio_at_zero"] = {{"normalized", ratio0}};
  if (c.loss.loss.name == "vs" && c.loss.tuning == "paper") {
    const bool ratio_ok = std::abs(ratio0 - 1.0) <= 1e-12;
    hard_ok = hard_ok && ratio_ok;
    report["ratio_at_zero"]["pass"] = ratio_ok;
  }
  report["pass"] = hard_ok;

  if (f.json) {
    std::cout << report.dump(2) << '\n';
  } else {
    auto line = [](const std::string& name, bool pass, const std::string& detail) {
      std::cout << (pass ? "ok    " : "FAIL  ") << name << "  " << detail << '\n';
    };
    auto num = [](double v) {
      char buf[32];
      std::snprintf(buf, sizeof buf, "%.3g", v);
      return std::string(buf);
    };
    line("q_grid", q_ok, "max abs error " + num(q_err));
    line("svm_kkt", kkt_ok, "max violation " + num(kkt));
    line("oracle_equivalence", oracle_ok, "relative L2 " + num(rel));
    std::cout << "info  good_event overall=" << report["good_event"]["overall"]
              << " smallest_c1=" << report["good_event"]["smallest_c1"] << '\n';
    std::cout << "info  assumptions " << report["assumptions"].dump() << '\n';
    std::cout << "info  separability " << report["separability"].dump() << '\n';
    std::cout << "info  margin_equality spread " << num(me.spread) << " ("
              << active.size() << "/" << ds.n() << " support vectors)\n";
    std::cout << "info  ratio at w=0 " << num(ratio0) << '\n';
    std::cout << (hard_ok ? "verify: pass" : "verify: FAIL") << '\n';
  }
  return hard_ok ? kExitOk : kExitVerify;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"vslab: group-imbalanced Gaussian mixture experiments with VS-loss"};
  app.require_subcommand(1);
  Flags f;

  auto common = [&f](CLI::App* sub) {
    sub->add_option("--config", f.config_path, "JSON config file");
    sub->add_option("--seed", f.seed, "global seed");
    sub->add_option("--out", f.out, "output directory");
    sub->add_option("--workers", f.workers, "sweep worker threads (fallback: VSLAB_WORKERS)");
    sub->add_option("--loss", f.loss, "vs, la or ce");
    sub->add_option("--tuning", f.tuning, "paper or manual");
    sub->add_option("--mc-samples", f.mc_samples, "Monte Carlo draws per group (0 disables)");
    sub->add_flag("--json", f.json, "machine-readable output");
  };

  CLI::App* gen = app.add_subcommand("gen", "sample a dataset and write it to <out>/dataset.txt");
  CLI::App* train = app.add_subcommand("train", "run gradient descent and report test errors");
  CLI::App* sweep = app.add_subcommand("sweep", "run a parameter sweep and write CSV plus plot script");
  CLI::App* verify = app.add_subcommand("verify", "run diagnostics; exit 4 on a hard failure");
  CLI::App* config = app.add_subcommand("config", "print the effective configuration");
  for (CLI::App* s : {gen, train, sweep, verify, config}) common(s);
  train->add_option("--init-norm", f.init_norm, "random initialization with this norm");
  for (CLI::App* s : {sweep, config}) {
    s->add_option("--preset", f.preset, "named grid (fig2)");
    s->add_option("--variant", f.variant, "fixed or growing");
  }
  verify->add_option("--q-table", f.q_table, "CSV of x,Q(x) reference values");
  sweep->add_flag("--dry-run", f.dry_run, "print the expanded grid without computing");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*gen) return cmd_gen(f);
    if (*train) return cmd_train(f);
    if (*sweep) return cmd_sweep(f);
    if (*verify) return cmd_verify(f);
    return cmd_config(f);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
}
