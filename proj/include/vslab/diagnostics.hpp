#pragma once

#include <string>
#include <vector>

#include "vslab/cs_svm.hpp"
#include "vslab/data.hpp"
#include "vslab/gd.hpp"

namespace vslab {

struct DiagnosticsConfig {
  /// Constant of the good-event inequalities (c1 >= 1).
  double c1 = 3.0;
  /// Regime constant of the overparameterization assumptions.
  double C = 10.0;
  /// Failure probability.
  double delta = 0.05;
  double kkt_tol = 1e-8;
  double margin_spread_tol = 1e-2;
  double ratio_ceiling = 10.0;
};

void validate(const DiagnosticsConfig& cfg);

struct InequalityCheck {
  std::string name;
  bool pass = true;
  /// min over instances of (bound - lhs); +inf when nothing was checked.
  double worst_slack = 0;
  /// Smallest c1 >= 1 under which this inequality holds (+inf if none does).
  double required_c1 = 1;
  long long instances = 0;
};

struct GoodEventReport {
  InequalityCheck norm_upper;     // ||z_i||^2 <= c1 d
  InequalityCheck norm_lower;     // ||z_i|| >= sqrt(d)/c1 - sqrt(R+)  (or the R+ > c1^2 d branch)
  InequalityCheck same_group;     // |<z_i, nu_{b_i}> - R+| <= R+/2
  InequalityCheck cross_group;    // |<z_i, nu_{-b_i}> - R-| <= c1 sqrt(R+ log(n/delta))
  InequalityCheck pairwise;       // |<z_i, z_j> - R_{+/-}| <= c1 sqrt(d log(n/delta))
  bool overall = true;
  double smallest_c1 = 1;

  std::vector<const InequalityCheck*> checks() const {
    return {&norm_upper, &norm_lower, &same_group, &cross_group, &pairwise};
  }
};

GoodEventReport good_event_check(const Dataset& ds, const DiagnosticsConfig& cfg);

struct AssumptionReport {
  bool a = false;  // n >= C log(1/delta)
  bool b = false;  // ||mu_c||^2 >= C log(n/delta)
  bool c = false;  // d >= C R+ n
  bool d = false;  // d >= C n^2 log(n/delta)
  double largest_C = 0;

  bool all() const { return a && b && c && d; }
};

AssumptionReport assumption_check(const ProblemSpec& spec, int d, const DiagnosticsConfig& cfg);

struct SeparabilityWitness {
  Classifier w_tilde;
  double min_margin = 0;  // min_i <w~ / ||w~||, z_i>
  bool separable = false;
  double reference_scale = 0;  // sqrt(d / n)
};

/// w~ = sum_i [z_{i,core}; 0].
SeparabilityWitness separability_witness(const Dataset& ds);

struct RatioSeries {
  /// max_{i,j} (l'_i / l'_j)(Delta_i / Delta_j) per record.
  std::vector<double> normalized;
  /// max_{i,j} l'_i / l'_j per record.
  std::vector<double> raw;
};

RatioSeries ratio_monitor(const std::vector<Vector>& log_derivs, const Eigen::VectorXi& groups,
                          const GroupValues& deltas);

struct MarginEquality {
  double spread = 0;
  bool pass = false;
};

/// spread = (max - min) / mean of the scaled margins.
MarginEquality margin_equality_check(const Dataset& ds, const GroupValues& deltas,
                                     const Classifier& w, double tol);

/// Largest c0 with c0 L' <= L'_b / 2 + (R-/R+ - c1/C) L'_{-b} for both b.
double comparison_constant(double log_Lp_plus, double log_Lp_minus, double r_ratio, double c1,
                           double C);

/// Envelopes implied by the correlation and norm bounds at one telemetry point.
struct CorrelationEnvelope {
  double rho_lower_plus = 0;
  double rho_lower_minus = 0;
  double norm_upper = 0;
};

CorrelationEnvelope correlation_envelope(const TelemetryPoint& p, const TelemetryPoint& start,
                                         double eta, double r_plus, double r_minus, int d,
                                         const DiagnosticsConfig& cfg);

}  // namespace vslab
