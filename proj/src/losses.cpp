#include "vslab/losses.hpp"

namespace vslab {

namespace {

void check_counts(int n_plus, int n_minus) {
  if (n_plus < 0 || n_minus < 0) throw ConfigError("group sizes must be non-negative");
  if (n_plus == 0 || n_minus == 0)
    throw ConfigError("cannot tune the loss: a group has zero training samples");
}

void check_params(const VsLossParams& p, int b) {
  if (b != 1 && b != -1) throw ConfigError("group must be +1 or -1");
  if (!(p.delta[b] > 0.0) || !(p.omega[b] > 0.0))
    throw ConfigError("loss parameters need delta > 0 and omega > 0");
}

// Logit u = -delta * m + iota.
double logit(const VsLossParams& p, int b, double margin) {
  if (std::isnan(margin)) throw NumericalError("loss evaluated at a NaN margin");
  return -p.delta[b] * margin + p.iota[b];
}

}  // namespace

VsLossParams tune_vs_defaults(int n_plus, int n_minus, LossShape shape) {
  check_counts(n_plus, n_minus);
  const double n = n_plus + n_minus;
  VsLossParams p;
  p.shape = shape;
  p.delta = {n_plus / n, n_minus / n};
  p.omega = {1.0, 1.0};
  p.iota = {-2.0 * std::log(p.delta.plus), -2.0 * std::log(p.delta.minus)};
  return p;
}

VsLossParams tune_la(int n_plus, int n_minus, double iota_scale, LossShape shape) {
  check_counts(n_plus, n_minus);
  const double n = n_plus + n_minus;
  VsLossParams p;
  p.shape = shape;
  p.delta = {1.0, 1.0};
  p.omega = {1.0, 1.0};
  p.iota = {-iota_scale * std::log(n_plus / n), -iota_scale * std::log(n_minus / n)};
  return p;
}

double log_neg_derivative(const VsLossParams& params, int b, double margin) {
  check_params(params, b);
  const double u = logit(params, b, margin);
  const double scale = std::log(params.delta[b]) + std::log(params.omega[b]);
  if (params.shape == LossShape::exponential) return scale + u;
  // log sigmoid(u) = -softplus(-u)
  return scale - softplus(-u);
}

double neg_derivative(const VsLossParams& params, int b, double margin) {
  return std::exp(log_neg_derivative(params, b, margin));
}

double log_loss_value(const VsLossParams& params, int b, double margin) {
  check_params(params, b);
  const double u = logit(params, b, margin);
  const double log_omega = std::log(params.omega[b]);
  if (params.shape == LossShape::exponential) return log_omega + u;
  // log(softplus(u)); for very negative u, softplus(u) = e^u (1 - e^u / 2 + ...).
  if (u < -30.0) return log_omega + u + std::log1p(-0.5 * std::exp(u));
  return log_omega + std::log(softplus(u));
}

double loss_value(const VsLossParams& params, int b, double margin) {
  return std::exp(log_loss_value(params, b, margin));
}

GradSummary grad_summary(const VsLossParams& params, const Eigen::VectorXi& groups,
                         const Vector& margins) {
  if (groups.size() != margins.size())
    throw DimensionError("group tags and margins differ in length");
  const Eigen::Index n = margins.size();
  GradSummary g;
  g.log_derivs.resize(n);
  for (Eigen::Index i = 0; i < n; ++i)
    g.log_derivs(i) = log_neg_derivative(params, groups(i), margins(i));

  // Group sums, each shifted by its own maximum.
  double top_plus = -std::numeric_limits<double>::infinity();
  double top_minus = top_plus;
  for (Eigen::Index i = 0; i < n; ++i) {
    double& top = groups(i) > 0 ? top_plus : top_minus;
    top = std::max(top, g.log_derivs(i));
  }
  double acc_plus = 0.0, acc_minus = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (groups(i) > 0)
      acc_plus += std::exp(g.log_derivs(i) - top_plus);
    else
      acc_minus += std::exp(g.log_derivs(i) - top_minus);
  }
  if (acc_plus > 0.0) g.log_sum_plus = top_plus + std::log(acc_plus);
  if (acc_minus > 0.0) g.log_sum_minus = top_minus + std::log(acc_minus);
  g.log_sum = log_add_exp(g.log_sum_plus, g.log_sum_minus);
  return g;
}

GradSummary grad_summary(const VsLossParams& params, const Dataset& ds,
                         const Classifier& w) {
  if (w.w.size() != ds.d()) throw DimensionError("classifier and data dimensions differ");
  const Vector margins = ds.z * w.w;
  return grad_summary(params, ds.b, margins);
}

double log_total_loss(const VsLossParams& params, const Eigen::VectorXi& groups,
                      const Vector& margins) {
  Vector logs(margins.size());
  for (Eigen::Index i = 0; i < margins.size(); ++i)
    logs(i) = log_loss_value(params, groups(i), margins(i));
  return log_sum_exp(logs);
}

Vector per_sample_deltas(const Eigen::VectorXi& groups, const GroupValues& deltas) {
  Vector out(groups.size());
  for (Eigen::Index i = 0; i < groups.size(); ++i) out(i) = deltas[groups(i)];
  return out;
}

}  // namespace vslab
