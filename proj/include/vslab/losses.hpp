#pragma once

#include <cmath>
#include <limits>

#include "vslab/data.hpp"
#include "vslab/model.hpp"

namespace vslab {

enum class LossShape { exponential, logistic };

/// Vector-scaling loss: per group b a weight omega_b, additive logit offset
/// iota_b and multiplicative logit factor delta_b. For margin m = <z, w>:
///   exponential  l = omega * exp(-delta * m + iota)
///   logistic     l = omega * log(1 + exp(-delta * m + iota))
struct VsLossParams {
  LossShape shape = LossShape::exponential;
  GroupValues omega{1.0, 1.0};
  GroupValues iota{0.0, 0.0};
  GroupValues delta{1.0, 1.0};
};

/// Delta_b = n_b / n, omega_b = 1, iota_b = -2 log Delta_b.
VsLossParams tune_vs_defaults(int n_plus, int n_minus,
                              LossShape shape = LossShape::exponential);

/// Logit-adjusted loss: Delta_b = 1, iota_b = -iota_scale * log(n_b / n).
VsLossParams tune_la(int n_plus, int n_minus, double iota_scale = 1.0,
                     LossShape shape = LossShape::exponential);

/// Numerically stable log(1 + e^u).
inline double softplus(double u) {
  return u > 0.0 ? u + std::log1p(std::exp(-u)) : std::log1p(std::exp(u));
}

/// log of the negative loss derivative with respect to the margin.
double log_neg_derivative(const VsLossParams& params, int b, double margin);
double neg_derivative(const VsLossParams& params, int b, double margin);

/// log of the loss value.
double log_loss_value(const VsLossParams& params, int b, double margin);
double loss_value(const VsLossParams& params, int b, double margin);

/// log(sum exp(v)); -inf for an empty input.
template <typename Derived>
double log_sum_exp(const Eigen::MatrixBase<Derived>& v) {
  if (v.size() == 0) return -std::numeric_limits<double>::infinity();
  const double top = v.maxCoeff();
  if (!std::isfinite(top)) return top;
  return top + std::log((v.array() - top).exp().sum());
}

inline double log_add_exp(double x, double y) {
  if (x == -std::numeric_limits<double>::infinity()) return y;
  if (y == -std::numeric_limits<double>::infinity()) return x;
  const double top = std::max(x, y);
  return top + std::log1p(std::exp(-std::abs(x - y)));
}

/// Per-sample negative derivatives and their group sums, all as logs.
struct GradSummary {
  Vector log_derivs;
  double log_sum_plus = -std::numeric_limits<double>::infinity();
  double log_sum_minus = -std::numeric_limits<double>::infinity();
  double log_sum = -std::numeric_limits<double>::infinity();

  double sum_plus() const { return std::exp(log_sum_plus); }
  double sum_minus() const { return std::exp(log_sum_minus); }
  double sum() const { return std::exp(log_sum); }
};

/// Summary from precomputed margins m_i = <z_i, w> and group tags.
GradSummary grad_summary(const VsLossParams& params, const Eigen::VectorXi& groups,
                         const Vector& margins);
GradSummary grad_summary(const VsLossParams& params, const Dataset& ds,
                         const Classifier& w);

/// log of the total loss sum_i l_i.
double log_total_loss(const VsLossParams& params, const Eigen::VectorXi& groups,
                      const Vector& margins);

/// max_{i,j} (l'_i / l'_j) (Delta_i / Delta_j), evaluated in log domain from
/// per-sample log derivatives and per-sample log Delta.
inline double max_normalized_ratio(const Vector& log_derivs, const Vector& log_deltas) {
  if (log_derivs.size() == 0) return 1.0;
  const Vector s = log_derivs + log_deltas;
  return std::exp(s.maxCoeff() - s.minCoeff());
}

/// Per-sample Delta_{b_i}.
Vector per_sample_deltas(const Eigen::VectorXi& groups, const GroupValues& deltas);

}  // namespace vslab
