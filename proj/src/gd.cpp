#include "vslab/gd.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <sstream>

namespace vslab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Applies w += eta * sum_i exp(log_derivs_i) z_i with a shared shift.
void apply_update(Vector& w, const Matrix& z, const Vector& log_derivs, double eta) {
  const double shift = log_derivs.maxCoeff();
  const Vector weights = (log_derivs.array() - shift).exp().matrix();
  const double log_scale = std::log(eta) + shift;
  // Below the smallest subnormal the update is exactly zero.
  if (log_scale < -745.0) return;
  w.noalias() += std::exp(log_scale) * (z.transpose() * weights);
}

}  // namespace

void validate(const GdConfig& cfg) {
  if (cfg.step_size && !(*cfg.step_size > 0.0 && std::isfinite(*cfg.step_size)))
    throw ConfigError("step_size must be positive and finite");
  if (cfg.max_iters < 1) throw ConfigError("max_iters must be at least 1");
  if (!(cfg.stop_direction_tol > 0.0)) throw ConfigError("stop_direction_tol must be positive");
  if (cfg.stop_window < 1) throw ConfigError("stop_window must be at least 1");
  if (cfg.telemetry_stride < 1) throw ConfigError("telemetry_stride must be at least 1");
  if (!(cfg.init_ball_c0 > 0.0)) throw ConfigError("init_ball_c0 must be positive");
}

double auto_step_size(const Dataset& ds) {
  if (ds.n() < 1) throw ConfigError("auto step size needs a nonempty dataset");
  return std::log(2.0) / (16.0 * ds.d() * static_cast<double>(ds.n()));
}

double direction_change(const Vector& u, const Vector& v) {
  const double nu = u.norm();
  const double nv = v.norm();
  if (nu == 0.0 || nv == 0.0) return 1.0;
  return 0.5 * (u / nu - v / nv).squaredNorm();
}

Classifier gd_step(const VsLossParams& params, const Dataset& ds, const Classifier& w,
                   double eta) {
  if (!(eta > 0.0)) throw ConfigError("step size must be positive");
  if (w.w.size() != ds.d()) throw DimensionError("classifier and data dimensions differ");
  const GradSummary g = grad_summary(params, ds, w);
  Classifier next{w.w};
  apply_update(next.w, ds.z, g.log_derivs, eta);
  if (!next.w.allFinite()) throw StepSizeError("gradient step produced a non-finite iterate", 1);
  return next;
}

Trajectory run_gd(const VsLossParams& params, const Dataset& ds, const GdConfig& cfg) {
  validate(cfg);
  const int d = ds.d();
  Trajectory traj;
  traj.auto_step = !cfg.step_size.has_value();
  traj.eta = cfg.step_size.value_or(auto_step_size(ds));

  Vector w = Vector::Zero(d);
  if (cfg.init) {
    if (cfg.init->size() != d) throw DimensionError("init vector has the wrong dimension");
    w = *cfg.init;
    const double ball = cfg.init_ball_c0 / std::sqrt(static_cast<double>(d));
    if (w.norm() > ball) {
      std::ostringstream msg;
      msg << "initial iterate norm " << w.norm() << " exceeds the O(1/sqrt(d)) ball radius "
          << ball;
      traj.warnings.push_back(msg.str());
    }
  }

  const Vector log_deltas = per_sample_deltas(ds.b, params.delta).array().log().matrix();
  const Vector deltas = per_sample_deltas(ds.b, params.delta);
  double log_cum_plus = kNegInf;
  double log_cum_minus = kNegInf;

  auto record = [&](std::int64_t t, const Vector& iterate, const Vector& margins,
                    const GradSummary& g) {
    TelemetryPoint p;
    p.t = t;
    p.norm_w = iterate.norm();
    p.rho_plus = iterate.dot(ds.nu.plus);
    p.rho_minus = iterate.dot(ds.nu.minus);
    p.log_loss = log_total_loss(params, ds.b, margins);
    p.log_Lp_plus = g.log_sum_plus;
    p.log_Lp_minus = g.log_sum_minus;
    p.max_norm_ratio = max_normalized_ratio(g.log_derivs, log_deltas);
    if (p.norm_w > 0.0) {
      const Vector scaled = deltas.cwiseProduct(margins) / p.norm_w;
      p.min_scaled_margin = scaled.minCoeff();
      p.max_scaled_margin = scaled.maxCoeff();
    } else {
      p.min_scaled_margin = kNaN;
      p.max_scaled_margin = kNaN;
    }
    p.direction_change = kNaN;
    p.log_cum_Lp_plus = log_cum_plus;
    p.log_cum_Lp_minus = log_cum_minus;
    traj.points.push_back(p);
    if (cfg.record_sample_derivatives) traj.sample_log_derivs.push_back(g.log_derivs);
  };

  Vector margins = ds.z * w;
  GradSummary g = grad_summary(params, ds.b, margins);
  record(0, w, margins, g);

  int quiet_points = 0;
  int rising_points = 0;
  std::int64_t t = 0;
  while (t < cfg.max_iters) {
    Vector next = w;
    apply_update(next, ds.z, g.log_derivs, traj.eta);
    log_cum_plus = log_add_exp(log_cum_plus, g.log_sum_plus);
    log_cum_minus = log_add_exp(log_cum_minus, g.log_sum_minus);
    ++t;
    if (!next.allFinite()) throw StepSizeError("gradient descent produced a non-finite iterate", t);

    margins.noalias() = ds.z * next;
    g = grad_summary(params, ds.b, margins);

    const bool at_stride = t % cfg.telemetry_stride == 0 || t == cfg.max_iters;
    if (at_stride) {
      const double change = direction_change(w, next);
      const double previous = traj.points.back().log_loss;
      record(t, next, margins, g);
      traj.points.back().direction_change = change;
      const double current = traj.points.back().log_loss;

      const double slack = 1e-12 * std::max(1.0, std::abs(previous));
      if (current > previous + slack) {
        if (traj.auto_step)
          throw StepSizeError("total loss increased under the auto step size", t);
        if (++rising_points > 3)
          throw StepSizeError("total loss increased at more than three consecutive telemetry points",
                              t);
      } else {
        rising_points = 0;
      }

      if (change < cfg.stop_direction_tol) {
        if (++quiet_points >= cfg.stop_window) {
          w = std::move(next);
          traj.converged = true;
          break;
        }
      } else {
        quiet_points = 0;
      }
    }
    w = std::move(next);
  }

  traj.iters_run = t;
  traj.final_w.w = std::move(w);
  return traj;
}

void write_trajectory_csv(const Trajectory& traj, std::ostream& os) {
  os << "t,norm_w,rho_plus,rho_minus,log_loss,log_Lp_plus,log_Lp_minus,max_norm_ratio,"
        "min_scaled_margin,max_scaled_margin\n";
  char buf[512];
  for (const TelemetryPoint& p : traj.points) {
    std::snprintf(buf, sizeof buf,
                  "%lld,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                  static_cast<long long>(p.t), p.norm_w, p.rho_plus, p.rho_minus, p.log_loss,
                  p.log_Lp_plus, p.log_Lp_minus, p.max_norm_ratio, p.min_scaled_margin,
                  p.max_scaled_margin);
    os << buf;
  }
}

}  // namespace vslab
