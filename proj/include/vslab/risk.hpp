#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>

#include "vslab/model.hpp"

namespace vslab {

/// Gaussian tail Q(x) = P(N(0,1) > x) = erfc(x / sqrt 2) / 2.
double q_function(double x);

struct McEstimate {
  int m_per_group = 0;
  double err_plus = 0;
  double err_minus = 0;
  /// 3 sqrt(p (1 - p) / m) per group.
  double radius_plus = 0;
  double radius_minus = 0;

  double wst_error() const { return std::max(err_plus, err_minus); }
  double wst_radius() const { return err_plus >= err_minus ? radius_plus : radius_minus; }
};

struct ErrorReport {
  double corr_plus = 0;
  double corr_minus = 0;
  double err_plus = 0;
  double err_minus = 0;
  double wst_error = 0;
  std::optional<McEstimate> mc;
  /// Named theorem-bound values. All of them depend on unnamed constants.
  std::map<std::string, double> bound_evals;
};

/// err_b = Q(<w / ||w||, nu_b>), worst = max over groups. Scale invariant.
ErrorReport worst_group_error(const Classifier& w, const Vector& nu_plus, const Vector& nu_minus);

/// Empirical error of sign(<w, z>) on m clean test draws per group.
McEstimate monte_carlo_error(const Classifier& w, const ProblemSpec& spec, int m_per_group,
                             std::uint64_t seed);

/// Q(c R+ / sqrt d).
double eval_vs_upper_bound(double r_plus, double d, double c = 1.0);

/// Q(c R+ sqrt(n/d) (1/tau + R-/R+ + c1 sqrt(log(n/delta) / R+))).
double eval_la_lower_bound(double r_plus, double r_minus, double n, double d, double tau,
                           double delta, double c = 1.0, double c1 = 1.0);

/// min(1, xi + Q(c R+ / sqrt d)).
double eval_benign_bound(double xi, double r_plus, double d, double c = 1.0);

}  // namespace vslab
