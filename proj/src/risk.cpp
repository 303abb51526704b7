#include "vslab/risk.hpp"

#include <cmath>
#include <numbers>

#include "vslab/data.hpp"

namespace vslab {

double q_function(double x) {
  if (std::isnan(x)) throw NumericalError("Q-function evaluated at NaN");
  return 0.5 * std::erfc(x / std::numbers::sqrt2);
}

ErrorReport worst_group_error(const Classifier& w, const Vector& nu_plus, const Vector& nu_minus) {
  if (w.w.size() != nu_plus.size() || w.w.size() != nu_minus.size())
    throw DimensionError("classifier and mean dimensions differ");
  const double norm = w.w.norm();
  if (!(norm > 0.0)) throw ConfigError("worst-group error is undefined for a zero classifier");
  const Vector unit = w.w / norm;
  ErrorReport r;
  r.corr_plus = unit.dot(nu_plus);
  r.corr_minus = unit.dot(nu_minus);
  r.err_plus = q_function(r.corr_plus);
  r.err_minus = q_function(r.corr_minus);
  r.wst_error = std::max(r.err_plus, r.err_minus);
  return r;
}

McEstimate monte_carlo_error(const Classifier& w, const ProblemSpec& spec, int m_per_group,
                             std::uint64_t seed) {
  if (m_per_group < 100) throw ConfigError("Monte Carlo needs at least 100 draws per group");
  if (w.w.size() != spec.d()) throw DimensionError("classifier and spec dimensions differ");
  const NuPair nu = build_nu(spec);
  McEstimate est;
  est.m_per_group = m_per_group;
  Vector q(spec.d());
  for (int b : {1, -1}) {
    // <w, nu_b + q> < 0; <w, nu_b> is shared by every draw.
    RngStream rng(seed, kTestStreamBase + (b > 0 ? 0 : 1));
    const double offset = w.w.dot(nu[b]);
    int errors = 0;
    for (int j = 0; j < m_per_group; ++j) {
      rng.fill_normal(q);
      if (offset + w.w.dot(q) < 0.0) ++errors;
    }
    const double p = static_cast<double>(errors) / m_per_group;
    const double radius = 3.0 * std::sqrt(p * (1.0 - p) / m_per_group);
    if (b > 0) {
      est.err_plus = p;
      est.radius_plus = radius;
    } else {
      est.err_minus = p;
      est.radius_minus = radius;
    }
  }
  return est;
}

double eval_vs_upper_bound(double r_plus, double d, double c) {
  if (!(d > 0.0)) throw ConfigError("d must be positive");
  return q_function(c * r_plus / std::sqrt(d));
}

double eval_la_lower_bound(double r_plus, double r_minus, double n, double d, double tau,
                           double delta, double c, double c1) {
  if (!(r_plus > 0.0)) throw ConfigError("R+ must be positive");
  if (!(tau >= 1.0)) throw ConfigError("tau must be at least 1");
  if (!(delta > 0.0 && delta < 1.0)) throw ConfigError("delta must lie in (0, 1)");
  if (!(d > 0.0) || !(n > 0.0)) throw ConfigError("n and d must be positive");
  const double inner =
      1.0 / tau + r_minus / r_plus + c1 * std::sqrt(std::log(n / delta) / r_plus);
  return q_function(c * r_plus * std::sqrt(n / d) * inner);
}

double eval_benign_bound(double xi, double r_plus, double d, double c) {
  if (!(xi >= 0.0 && xi < 1.0)) throw ConfigError("xi must lie in [0, 1)");
  return std::min(1.0, xi + eval_vs_upper_bound(r_plus, d, c));
}

}  // namespace vslab
