#include "vslab/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <thread>
#include <tuple>

namespace vslab {

VsLossParams make_loss_params(const LossConfig& loss, int n_plus, int n_minus) {
  if (loss.name == "vs") return tune_vs_defaults(n_plus, n_minus, loss.shape);
  if (loss.name == "la") return tune_la(n_plus, n_minus, loss.iota_scale, loss.shape);
  if (loss.name == "ce") return tune_la(n_plus, n_minus, 0.0, loss.shape);
  throw ConfigError("unknown loss '" + loss.name + "' (expected vs, la or ce)");
}

double TauRule::tau(int d) const {
  return kind == Kind::fixed ? value : std::pow(static_cast<double>(d), value);
}

double RPlusRule::r_plus(int d) const {
  return coefficient * std::pow(static_cast<double>(d), exponent);
}

std::string to_string(SolverChoice s) {
  switch (s) {
    case SolverChoice::gd: return "gd";
    case SolverChoice::cs_svm: return "cs_svm";
    case SolverChoice::both: return "both";
  }
  return "?";
}

void validate(const SweepGrid& grid) {
  if (grid.dims.empty()) throw ConfigError("sweep grid has no dimensions");
  if (grid.seeds.empty()) throw ConfigError("sweep grid has no seeds");
  if (grid.losses.empty()) throw ConfigError("sweep grid has no losses");
  for (int d : grid.dims)
    if (d < 4) throw ConfigError("every grid dimension must be at least 4");
  if (grid.n < 2) throw ConfigError("sweep n must be at least 2");
  if (!(grid.r_ratio >= -1.0 && grid.r_ratio <= 1.0)) throw ConfigError("r_ratio must lie in [-1, 1]");
  if (!(grid.xi >= 0.0 && grid.xi < 1.0)) throw ConfigError("xi must lie in [0, 1)");
  if (grid.mc_samples != 0 && grid.mc_samples < 100)
    throw ConfigError("mc_samples must be 0 or at least 100");
  if (!(grid.r_plus_rule.coefficient > 0.0)) throw ConfigError("R+ coefficient must be positive");
  for (const LossConfig& l : grid.losses) make_loss_params(l, 1, 1);
  validate(grid.gd);
}

SweepGrid fig2_preset(Fig2Variant variant) {
  SweepGrid g;
  g.label = variant == Fig2Variant::fixed_tau ? "fixed_tau" : "growing_tau";
  g.dims = {256, 1024, 4096, 16384};
  g.n = 200;
  if (variant == Fig2Variant::fixed_tau)
    g.tau_rule = {TauRule::Kind::fixed, 50.0};
  else
    g.tau_rule = {TauRule::Kind::power, 0.3};
  g.r_plus_rule = {0.25, 0.6};
  g.r_ratio = 0.0;
  g.losses = {LossConfig{"vs"}, LossConfig{"la"}};
  g.solver = SolverChoice::cs_svm;
  for (std::uint64_t s = 1; s <= 10; ++s) g.seeds.push_back(s);
  g.mc_samples = 20000;
  return g;
}

namespace {

struct PointKey {
  int d;
  std::uint64_t seed;
};

std::string status_of(const std::exception& e) {
  if (dynamic_cast<const NonSeparableError*>(&e)) return "non_separable";
  if (dynamic_cast<const SolverTimeoutError*>(&e)) return "timeout";
  if (dynamic_cast<const StepSizeError*>(&e)) return "step_size";
  if (dynamic_cast<const RankDeficiencyError*>(&e)) return "rank_deficient";
  if (dynamic_cast<const ConfigError*>(&e)) return "config_error";
  return "error";
}

void fill_errors(SweepRow& row, const Dataset& ds, const Classifier& w, const SweepGrid& grid) {
  const ErrorReport rep = worst_group_error(w, ds.nu.plus, ds.nu.minus);
  row.corr_plus = rep.corr_plus;
  row.corr_minus = rep.corr_minus;
  row.err_plus = rep.err_plus;
  row.err_minus = rep.err_minus;
  row.wst_error = rep.wst_error;
  row.margin_spread = margin_equality_check(ds, row.params.delta, w, 1.0).spread;
  row.train_sign_errors = static_cast<int>(((ds.z * w.w).array() <= 0.0).count());
  if (grid.mc_samples > 0) {
    const McEstimate mc = monte_carlo_error(w, ds.spec, grid.mc_samples,
                                            splitmix64(ds.seed) ^ static_cast<std::uint64_t>(ds.d()));
    row.mc_wst_error = mc.wst_error();
    row.mc_radius = mc.wst_radius();
  }
}

// All rows for one (d, seed) point, in loss order; GD rows follow CS-SVM rows.
std::vector<SweepRow> run_point(const SweepGrid& grid, const PointKey& key) {
  const double tau = grid.tau_rule.tau(key.d);
  const auto [n_plus, n_minus] = group_sizes(grid.n, tau);
  const double r_plus = grid.r_plus_rule.r_plus(key.d);
  const ProblemSpec spec = make_block_spec(key.d, r_plus, grid.r_ratio, n_plus, n_minus, grid.xi);
  const SnrSummary snr = snr_summary(spec);

  SweepRow base;
  base.d = key.d;
  base.n = grid.n;
  base.n_plus = n_plus;
  base.n_minus = n_minus;
  base.tau_effective = static_cast<double>(n_plus) / n_minus;
  base.r_plus = snr.r_plus;
  base.r_minus = snr.r_minus;
  base.xi = grid.xi;
  base.seed = std::to_string(key.seed);
  base.variant = grid.label;

  std::vector<SweepRow> rows;
  Dataset ds;
  try {
    ds = sample_dataset(spec, key.seed);
  } catch (const std::exception& e) {
    for (const LossConfig& loss : grid.losses) {
      SweepRow row = base;
      row.loss = loss.name;
      row.solver = to_string(grid.solver);
      row.status = status_of(e);
      rows.push_back(row);
    }
    return rows;
  }
  const GroupPair<int> counts = ds.observed_counts();

  for (const LossConfig& loss : grid.losses) {
    SweepRow row = base;
    row.loss = loss.name;
    try {
      row.params = make_loss_params(loss, counts.plus, counts.minus);
    } catch (const std::exception& e) {
      row.solver = to_string(grid.solver);
      row.status = status_of(e);
      rows.push_back(row);
      continue;
    }

    std::optional<Classifier> svm_w;
    std::optional<Classifier> gd_w;
    std::optional<SweepRow> svm_row;
    std::optional<SweepRow> gd_row;

    if (grid.solver != SolverChoice::gd) {
      SweepRow r = row;
      r.solver = "cs_svm";
      const auto t0 = std::chrono::steady_clock::now();
      try {
        const SvmSolution sol = solve_cs_svm(ds, r.params.delta, grid.svm);
        r.kkt_max_violation = certify_kkt(ds, r.params.delta, sol).max_violation();
        fill_errors(r, ds, sol.w, grid);
        svm_w = sol.w;
      } catch (const std::exception& e) {
        r.status = status_of(e);
      }
      if (grid.timing)
        r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      svm_row = r;
    }
    if (grid.solver != SolverChoice::cs_svm) {
      SweepRow r = row;
      r.solver = "gd";
      const auto t0 = std::chrono::steady_clock::now();
      try {
        const Trajectory traj = run_gd(r.params, ds, grid.gd);
        r.gd_iters = static_cast<double>(traj.iters_run);
        if (!traj.converged) r.status = "max_iters";
        fill_errors(r, ds, traj.final_w, grid);
        gd_w = traj.final_w;
      } catch (const std::exception& e) {
        r.status = status_of(e);
      }
      if (grid.timing)
        r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
      gd_row = r;
    }
    if (svm_w && gd_w) {
      const double cosine = svm_w->w.dot(gd_w->w) / (svm_w->w.norm() * gd_w->w.norm());
      svm_row->gd_svm_cosine = cosine;
      gd_row->gd_svm_cosine = cosine;
      svm_row->gd_iters = gd_row->gd_iters;
    }
    if (svm_row) rows.push_back(*svm_row);
    if (gd_row) rows.push_back(*gd_row);
  }
  return rows;
}

std::vector<SweepRow> aggregate(const std::vector<SweepRow>& rows) {
  using Key = std::tuple<int, std::string, std::string>;
  std::vector<Key> order;
  std::map<Key, std::vector<const SweepRow*>> groups;
  for (const SweepRow& r : rows) {
    const Key key{r.d, r.loss, r.solver};
    auto [it, inserted] = groups.try_emplace(key);
    if (inserted) order.push_back(key);
    if (r.status == "ok" || r.status == "max_iters") it->second.push_back(&r);
  }

  std::vector<SweepRow> out;
  for (const Key& key : order) {
    const auto& members = groups[key];
    if (members.empty()) continue;

    auto stats = [&](auto get) -> std::pair<std::optional<double>, std::optional<double>> {
      double sum = 0.0;
      int count = 0;
      for (const SweepRow* r : members) {
        const std::optional<double> v = get(*r);
        if (!v) return {std::nullopt, std::nullopt};
        sum += *v;
        ++count;
      }
      const double mean = sum / count;
      double ss = 0.0;
      for (const SweepRow* r : members) ss += (*get(*r) - mean) * (*get(*r) - mean);
      const double se = count > 1 ? std::sqrt(ss / (count - 1)) / std::sqrt(static_cast<double>(count)) : 0.0;
      return {mean, se};
    };

    SweepRow mean = *members.front();
    mean.aggregate = true;
    mean.status = "aggregate";
    mean.seed = "mean";
    mean.wall_ms.reset();
    mean.train_sign_errors = 0;
    SweepRow se = mean;
    se.seed = "se";

    auto assign = [&](auto get, auto set) {
      const auto [m, s] = stats(get);
      set(mean, m);
      set(se, s);
    };
    auto plain = [](double SweepRow::*field) {
      return [field](const SweepRow& r) -> std::optional<double> { return r.*field; };
    };
    auto plain_set = [](double SweepRow::*field) {
      return [field](SweepRow& r, std::optional<double> v) { r.*field = v.value_or(0.0); };
    };
    auto opt = [](std::optional<double> SweepRow::*field) {
      return [field](const SweepRow& r) { return r.*field; };
    };
    auto opt_set = [](std::optional<double> SweepRow::*field) {
      return [field](SweepRow& r, std::optional<double> v) { r.*field = v; };
    };

    assign(plain(&SweepRow::corr_plus), plain_set(&SweepRow::corr_plus));
    assign(plain(&SweepRow::corr_minus), plain_set(&SweepRow::corr_minus));
    assign(plain(&SweepRow::err_plus), plain_set(&SweepRow::err_plus));
    assign(plain(&SweepRow::err_minus), plain_set(&SweepRow::err_minus));
    assign(plain(&SweepRow::wst_error), plain_set(&SweepRow::wst_error));
    assign(opt(&SweepRow::mc_wst_error), opt_set(&SweepRow::mc_wst_error));
    assign(opt(&SweepRow::mc_radius), opt_set(&SweepRow::mc_radius));
    assign(opt(&SweepRow::margin_spread), opt_set(&SweepRow::margin_spread));
    assign(opt(&SweepRow::kkt_max_violation), opt_set(&SweepRow::kkt_max_violation));
    assign(opt(&SweepRow::gd_iters), opt_set(&SweepRow::gd_iters));
    assign(opt(&SweepRow::gd_svm_cosine), opt_set(&SweepRow::gd_svm_cosine));
    out.push_back(mean);
    out.push_back(se);
  }
  return out;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : std::string(); }

}  // namespace

std::vector<SweepRow> run_sweep(const SweepGrid& grid_in, int workers) {
  validate(grid_in);
  SweepGrid grid = grid_in;
  std::sort(grid.dims.begin(), grid.dims.end());
  grid.dims.erase(std::unique(grid.dims.begin(), grid.dims.end()), grid.dims.end());
  std::sort(grid.seeds.begin(), grid.seeds.end());
  grid.seeds.erase(std::unique(grid.seeds.begin(), grid.seeds.end()), grid.seeds.end());

  std::vector<PointKey> points;
  for (int d : grid.dims)
    for (std::uint64_t s : grid.seeds) points.push_back({d, s});

  std::vector<std::vector<SweepRow>> results(points.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < points.size(); i = next++) results[i] = run_point(grid, points[i]);
  };
  const int pool = std::max(1, std::min<int>(workers, static_cast<int>(points.size())));
  if (pool == 1) {
    worker();
  } else {
    std::vector<std::jthread> threads;
    for (int t = 0; t < pool; ++t) threads.emplace_back(worker);
  }

  // Reorder to (d asc, loss, seed asc); within a point rows are in loss order.
  std::vector<SweepRow> rows;
  const std::size_t n_seeds = grid.seeds.size();
  for (std::size_t di = 0; di < grid.dims.size(); ++di) {
    for (const LossConfig& loss : grid.losses) {
      for (std::size_t si = 0; si < n_seeds; ++si) {
        for (const SweepRow& r : results[di * n_seeds + si])
          if (r.loss == loss.name) rows.push_back(r);
      }
    }
  }
  const std::vector<SweepRow> agg = aggregate(rows);
  rows.insert(rows.end(), agg.begin(), agg.end());
  return rows;
}

std::vector<SweepRow> run_sweep(const SweepGrid& grid, const std::filesystem::path& out_path,
                                int workers) {
  std::vector<SweepRow> rows = run_sweep(grid, workers);
  if (out_path.has_parent_path()) std::filesystem::create_directories(out_path.parent_path());
  std::ofstream os(out_path, std::ios::binary);
  if (!os) throw ConfigError("cannot open sweep output '" + out_path.string() + "'");
  write_sweep_csv(rows, os);
  return rows;
}

std::string sweep_csv_header() {
  return "d,n,n_plus,n_minus,tau_effective,R_plus,R_minus,loss,delta_plus,delta_minus,"
         "iota_plus,iota_minus,omega_plus,omega_minus,xi,seed,solver,status,corr_plus,"
         "corr_minus,err_plus,err_minus,wst_error,mc_wst_error,mc_radius,margin_spread,"
         "kkt_max_violation,gd_iters,gd_svm_cosine,wall_ms";
}

void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& os) {
  os << sweep_csv_header() << '\n';
  for (const SweepRow& r : rows) {
    const VsLossParams& p = r.params;
    os << r.d << ',' << r.n << ',' << r.n_plus << ',' << r.n_minus << ',' << fmt(r.tau_effective)
       << ',' << fmt(r.r_plus) << ',' << fmt(r.r_minus) << ',' << r.loss << ','
       << fmt(p.delta.plus) << ',' << fmt(p.delta.minus) << ',' << fmt(p.iota.plus) << ','
       << fmt(p.iota.minus) << ',' << fmt(p.omega.plus) << ',' << fmt(p.omega.minus) << ','
       << fmt(r.xi) << ',' << r.seed << ',' << r.solver << ',' << r.status << ','
       << fmt(r.corr_plus) << ',' << fmt(r.corr_minus) << ',' << fmt(r.err_plus) << ','
       << fmt(r.err_minus) << ',' << fmt(r.wst_error) << ',' << fmt(r.mc_wst_error) << ','
       << fmt(r.mc_radius) << ',' << fmt(r.margin_spread) << ',' << fmt(r.kkt_max_violation)
       << ',' << fmt(r.gd_iters) << ',' << fmt(r.gd_svm_cosine) << ',' << fmt(r.wall_ms) << '\n';
  }
}

std::filesystem::path emit_plot_script(const std::vector<SweepRow>& rows,
                                       const std::filesystem::path& out_dir,
                                       const std::string& stem) {
  std::vector<std::pair<const SweepRow*, const SweepRow*>> series;
  for (std::size_t i = 0; i + 1 < rows.size(); ++i)
    if (rows[i].aggregate && rows[i].seed == "mean" && rows[i + 1].seed == "se")
      series.emplace_back(&rows[i], &rows[i + 1]);
  if (series.empty()) throw ConfigError("emit_plot_script needs aggregate sweep rows");

  std::filesystem::create_directories(out_dir);
  const std::string data_name = stem + ".dat";
  {
    std::ofstream os(out_dir / data_name, std::ios::binary);
    if (!os) throw ConfigError("cannot write plot data in '" + out_dir.string() + "'");
    os << "variant d loss solver tau_effective wst_mean wst_se\n";
    for (const auto& [mean, se] : series)
      os << mean->variant << ' ' << mean->d << ' ' << mean->loss << ' ' << mean->solver << ' '
         << fmt(mean->tau_effective) << ' ' << fmt(mean->wst_error) << ' ' << fmt(se->wst_error)
         << '\n';
  }

  const std::filesystem::path script = out_dir / (stem + ".py");
  std::ofstream os(script, std::ios::binary);
  if (!os) throw ConfigError("cannot write plot script in '" + out_dir.string() + "'");
  os << R"PY(#!/usr/bin/env python3
"""Worst-group error versus dimension: solid lines fixed tau, dashed lines growing tau."""
import os
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

HERE = os.path.dirname(os.path.abspath(__file__))
DATA = os.path.join(HERE, ")PY"
     << data_name << R"PY(")
OUT = os.path.join(HERE, ")PY"
     << stem << R"PY(.png")

STYLES = {"fixed_tau": "-", "growing_tau": "--"}
COLORS = {"vs": "tab:blue", "la": "tab:red", "ce": "tab:gray"}

series = defaultdict(list)
with open(DATA) as fh:
    next(fh)
    for line in fh:
        variant, d, loss, solver, tau, mean, se = line.split()
        series[(variant, loss, solver)].append((int(d), float(mean), float(se)))

fig, ax = plt.subplots(figsize=(5, 4))
for (variant, loss, solver), pts in sorted(series.items()):
    pts.sort()
    ds = [p[0] for p in pts]
    ax.errorbar(ds, [p[1] for p in pts], yerr=[p[2] for p in pts],
                linestyle=STYLES.get(variant, ":"), color=COLORS.get(loss, "black"),
                marker="o", capsize=3, label=f"{loss.upper()} ({variant}, {solver})")
ax.set_xscale("log", base=2)
ax.set_xlabel("d")
ax.set_ylabel("worst-group error")
ax.legend(fontsize=8)
fig.tight_layout()
fig.savefig(OUT, dpi=150)
print(OUT)
)PY";
  return script;
}

void print_grid(const SweepGrid& grid_in, std::ostream& os) {
  validate(grid_in);
  SweepGrid grid = grid_in;
  std::sort(grid.dims.begin(), grid.dims.end());
  std::sort(grid.seeds.begin(), grid.seeds.end());
  os << "grid " << grid.label << ": " << grid.dims.size() << " dims x " << grid.losses.size()
     << " losses x " << grid.seeds.size() << " seeds, solver " << to_string(grid.solver)
     << ", mc_samples " << grid.mc_samples << '\n';
  for (int d : grid.dims) {
    const double tau = grid.tau_rule.tau(d);
    const auto [n_plus, n_minus] = group_sizes(grid.n, tau);
    for (const LossConfig& loss : grid.losses) {
      os << "d=" << d << " n=" << grid.n << " n_plus=" << n_plus << " n_minus=" << n_minus
         << " tau_effective=" << fmt(static_cast<double>(n_plus) / n_minus)
         << " R_plus=" << fmt(grid.r_plus_rule.r_plus(d)) << " loss=" << loss.name
         << " xi=" << fmt(grid.xi) << " seeds=";
      for (std::size_t i = 0; i < grid.seeds.size(); ++i)
        os << (i ? "," : "") << grid.seeds[i];
      os << '\n';
    }
  }
}

}  // namespace vslab
