#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "vslab/cs_svm.hpp"
#include "vslab/diagnostics.hpp"
#include "vslab/experiments.hpp"
#include "vslab/gd.hpp"
#include "vslab/risk.hpp"

namespace vslab {

using Json = nlohmann::json;

/// Problem section. Unset optionals fall back to the preset rules:
/// equal block split, R+ = d^0.6 / 4, group sizes from (n, tau).
struct ProblemConfig {
  int d = 256;
  std::optional<int> d_core;
  int n = 200;
  double tau = 50.0;
  std::optional<int> n_plus;
  std::optional<int> n_minus;
  std::optional<double> r_plus;
  double r_ratio = 0.0;
  double label_flip_rate = 0.0;
  SamplingMode sampling_mode = SamplingMode::fixed_counts;
  double pi_plus = 0.5;
  std::int64_t max_entries = SamplingLimits{}.max_entries;
};

struct LossSection {
  LossConfig loss;
  /// "paper" applies the tuning rule of the named loss; "manual" takes the
  /// explicit per-group values below.
  std::string tuning = "paper";
  GroupValues delta{1.0, 1.0};
  GroupValues iota{0.0, 0.0};
  GroupValues omega{1.0, 1.0};
};

struct InitSection {
  /// "zero" or "random" (Gaussian direction scaled to `norm`).
  std::string kind = "zero";
  double norm = 0.0;
};

struct RiskSection {
  /// Monte Carlo draws per group for train/verify; 0 disables.
  int mc_samples = 20000;
  double bound_c = 1.0;
  double bound_c1 = 1.0;
};

struct CliConfig {
  std::uint64_t seed = 1;
  std::string out = "out";
  int workers = 1;
  ProblemConfig problem;
  LossSection loss;
  GdConfig gd;
  InitSection init;
  SvmOptions svm;
  DiagnosticsConfig diagnostics;
  RiskSection risk;
  SweepGrid sweep = fig2_preset(Fig2Variant::fixed_tau);
};

/// Every key with its default; the key set of a valid config file.
Json default_config_json();

/// Merges `user` over the defaults; unknown keys throw ConfigError.
CliConfig parse_config(const Json& user);

/// Reads a JSON config file; a missing or malformed file throws ConfigError
/// naming the path.
CliConfig load_config(const std::filesystem::path& path);

Json to_json(const CliConfig& cfg);

ProblemSpec problem_spec(const ProblemConfig& cfg);
VsLossParams loss_params(const LossSection& cfg, int n_plus, int n_minus);
/// GdConfig with the init section applied (random init drawn from `seed`).
GdConfig gd_config(const CliConfig& cfg, int d);

Json to_json(const ErrorReport& r);
Json to_json(const GoodEventReport& r);
Json to_json(const AssumptionReport& r);
Json to_json(const SeparabilityWitness& r);
Json to_json(const VsLossParams& p);

}  // namespace vslab
