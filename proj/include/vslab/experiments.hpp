#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "vslab/cs_svm.hpp"
#include "vslab/diagnostics.hpp"
#include "vslab/gd.hpp"
#include "vslab/losses.hpp"
#include "vslab/risk.hpp"

namespace vslab {

/// A loss family member whose parameters are tuned from the group counts.
///   vs  Delta_b = n_b / n, iota_b = -2 log Delta_b
///   la  Delta_b = 1, iota_b = -iota_scale log(n_b / n)
///   ce  Delta_b = 1, iota_b = 0
struct LossConfig {
  std::string name = "vs";
  LossShape shape = LossShape::exponential;
  double iota_scale = 1.0;
};

VsLossParams make_loss_params(const LossConfig& loss, int n_plus, int n_minus);

struct TauRule {
  enum class Kind { fixed, power } kind = Kind::fixed;
  /// tau itself for fixed, the exponent for power (tau = d^value).
  double value = 50.0;

  double tau(int d) const;
};

/// R+ = coefficient * d^exponent.
struct RPlusRule {
  double coefficient = 0.25;
  double exponent = 0.6;

  double r_plus(int d) const;
};

enum class SolverChoice { gd, cs_svm, both };

std::string to_string(SolverChoice s);

struct SweepGrid {
  std::string label = "custom";
  std::vector<int> dims;
  int n = 200;
  TauRule tau_rule;
  RPlusRule r_plus_rule;
  /// Target R-/R+.
  double r_ratio = 0.0;
  double xi = 0.0;
  std::vector<LossConfig> losses;
  std::vector<std::uint64_t> seeds;
  SolverChoice solver = SolverChoice::cs_svm;
  /// Monte Carlo draws per group; 0 skips the Monte Carlo estimate.
  int mc_samples = 20000;
  GdConfig gd;
  SvmOptions svm;
  /// Record wall-clock time per row. Off keeps the CSV reproducible.
  bool timing = false;
};

void validate(const SweepGrid& grid);

enum class Fig2Variant { fixed_tau, growing_tau };

/// d in {256, 1024, 4096, 16384}, n = 200, R+ = d^0.6 / 4, R- = 0,
/// tau = 50 or d^0.3, losses {vs, la}, CS-SVM solver, seeds 1..10.
SweepGrid fig2_preset(Fig2Variant variant);

struct SweepRow {
  int d = 0;
  int n = 0;
  int n_plus = 0;
  int n_minus = 0;
  double tau_effective = 0;
  double r_plus = 0;
  double r_minus = 0;
  std::string loss;
  VsLossParams params;
  double xi = 0;
  /// Seed number, or "mean" / "se" for aggregate rows.
  std::string seed;
  std::string solver;
  std::string status = "ok";
  double corr_plus = 0;
  double corr_minus = 0;
  double err_plus = 0;
  double err_minus = 0;
  double wst_error = 0;
  std::optional<double> mc_wst_error;
  std::optional<double> mc_radius;
  std::optional<double> margin_spread;
  std::optional<double> kkt_max_violation;
  std::optional<double> gd_iters;
  std::optional<double> gd_svm_cosine;
  std::optional<double> wall_ms;

  // Not part of the CSV.
  std::string variant;
  bool aggregate = false;
  /// Training points whose sign disagrees with their stored label.
  int train_sign_errors = 0;
};

/// Runs every (d, seed) point on up to `workers` threads and returns the
/// per-seed rows ordered by (d, loss, seed) followed by mean and standard
/// error rows per (d, loss, solver). Per-point failures land in `status`.
std::vector<SweepRow> run_sweep(const SweepGrid& grid, int workers = 1);

/// Same, also writing the CSV to `out_path`.
std::vector<SweepRow> run_sweep(const SweepGrid& grid, const std::filesystem::path& out_path,
                                int workers);

void write_sweep_csv(const std::vector<SweepRow>& rows, std::ostream& os);
std::string sweep_csv_header();

/// Writes `<stem>.dat` with the aggregate rows and `<stem>.py`, a matplotlib
/// script that reads the data file next to it. Returns the script path.
std::filesystem::path emit_plot_script(const std::vector<SweepRow>& rows,
                                       const std::filesystem::path& out_dir,
                                       const std::string& stem = "fig2");

/// Human-readable listing of the expanded grid, one line per (d, loss) with its seeds.
void print_grid(const SweepGrid& grid, std::ostream& os);

}  // namespace vslab
