#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "vslab/data.hpp"
#include "vslab/losses.hpp"

namespace vslab {

struct GdConfig {
  /// Fixed step size eta; empty selects auto_step_size.
  std::optional<double> step_size;
  std::int64_t max_iters = 100000;
  /// Threshold on the per-step direction change 1 - cos(w^{t+1}, w^t).
  double stop_direction_tol = 1e-12;
  /// Consecutive telemetry points below the tolerance required to stop.
  int stop_window = 10;
  /// Initial iterate; empty means w^0 = 0.
  std::optional<Vector> init;
  /// A nonzero init beyond init_ball_c0 / sqrt(d) triggers a warning.
  double init_ball_c0 = 1.0;
  std::int64_t telemetry_stride = 100;
  /// Keep per-sample log l' at every telemetry point (for ratio_monitor).
  bool record_sample_derivatives = false;
};

void validate(const GdConfig& cfg);

struct TelemetryPoint {
  std::int64_t t = 0;
  double norm_w = 0;
  double rho_plus = 0;
  double rho_minus = 0;
  double log_loss = 0;
  double log_Lp_plus = 0;
  double log_Lp_minus = 0;
  double max_norm_ratio = 0;
  /// Scaled margins Delta_{b_i} <z_i, w / ||w||>; NaN while w = 0.
  double min_scaled_margin = 0;
  double max_scaled_margin = 0;
  /// 1 - cos(w^{t-1}, w^t) for the step arriving at this iterate; NaN at t = 0.
  double direction_change = 0;
  /// log of L'_{0:t-1,b}, the derivative sums accumulated over all steps taken.
  double log_cum_Lp_plus = 0;
  double log_cum_Lp_minus = 0;
};

struct Trajectory {
  std::vector<TelemetryPoint> points;
  /// Per-sample log l' at each telemetry point when requested.
  std::vector<Vector> sample_log_derivs;
  Classifier final_w;
  bool converged = false;
  std::int64_t iters_run = 0;
  double eta = 0;
  bool auto_step = false;
  std::vector<std::string> warnings;
};

/// eta = log(2) / (16 d n).
double auto_step_size(const Dataset& ds);

/// w + eta * sum_i l'_i z_i, accumulated with a shared log-scale factor.
Classifier gd_step(const VsLossParams& params, const Dataset& ds, const Classifier& w,
                   double eta);

/// Full-batch gradient descent until the direction settles or max_iters.
///
/// Under the auto step size the total loss must be non-increasing at every
/// telemetry point; a violation throws StepSizeError. With a user step size
/// the run aborts once the loss has risen at more than three consecutive
/// telemetry points.
Trajectory run_gd(const VsLossParams& params, const Dataset& ds, const GdConfig& cfg);

/// CSV with columns t, norm_w, rho_plus, rho_minus, log_loss, log_Lp_plus,
/// log_Lp_minus, max_norm_ratio, min_scaled_margin, max_scaled_margin.
void write_trajectory_csv(const Trajectory& traj, std::ostream& os);

/// 1 - cos(u, v), computed as ||u/|u| - v/|v|||^2 / 2.
double direction_change(const Vector& u, const Vector& v);

}  // namespace vslab
