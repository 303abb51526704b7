#include "vslab/diagnostics.hpp"

#include <cmath>
#include <limits>

#include "vslab/losses.hpp"

namespace vslab {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

InequalityCheck make_check(std::string name) {
  InequalityCheck c;
  c.name = std::move(name);
  c.worst_slack = kInf;
  c.required_c1 = 1.0;
  return c;
}

void observe(InequalityCheck& c, double bound, double lhs) {
  ++c.instances;
  c.worst_slack = std::min(c.worst_slack, bound - lhs);
  if (lhs > bound) c.pass = false;
}

// Lower bound on ||z|| for a given c1; -inf where neither branch applies.
double norm_lower_bound(double c1, double d, double r_plus) {
  if (r_plus > c1 * c1 * d) return std::sqrt(r_plus) / c1 - std::sqrt(d);
  if (d > c1 * c1 * r_plus) return std::sqrt(d) / c1 - std::sqrt(r_plus);
  return -kInf;
}

}  // namespace

void validate(const DiagnosticsConfig& cfg) {
  if (!(cfg.c1 >= 1.0)) throw ConfigError("diagnostics c1 must be >= 1");
  if (!(cfg.C > 0.0)) throw ConfigError("diagnostics C must be positive");
  if (!(cfg.delta > 0.0 && cfg.delta < 1.0)) throw ConfigError("diagnostics delta must lie in (0, 1)");
  if (!(cfg.kkt_tol > 0.0) || !(cfg.margin_spread_tol > 0.0) || !(cfg.ratio_ceiling > 0.0))
    throw ConfigError("diagnostics tolerances must be positive");
}

GoodEventReport good_event_check(const Dataset& ds, const DiagnosticsConfig& cfg) {
  validate(cfg);
  const SnrSummary snr = snr_summary(ds.spec);
  const double r_plus = snr.r_plus;
  const double r_minus = snr.r_minus;
  const int n = ds.n();
  const double d = ds.d();
  const double log_term = std::log(n / cfg.delta);
  const double c1 = cfg.c1;

  GoodEventReport rep;
  rep.norm_upper = make_check("norm_upper");
  rep.norm_lower = make_check("norm_lower");
  rep.same_group = make_check("same_group_alignment");
  rep.cross_group = make_check("cross_group_alignment");
  rep.pairwise = make_check("pairwise_inner_products");

  const Vector sq_norms = ds.z.rowwise().squaredNorm();
  const Vector proj_plus = ds.z * ds.nu.plus;
  const Vector proj_minus = ds.z * ds.nu.minus;

  double max_norm_ratio = 0.0;
  double max_cross = 0.0;
  double min_norm = kInf;
  for (int i = 0; i < n; ++i) {
    observe(rep.norm_upper, c1 * d, sq_norms(i));
    max_norm_ratio = std::max(max_norm_ratio, sq_norms(i) / d);

    const double norm = std::sqrt(sq_norms(i));
    min_norm = std::min(min_norm, norm);
    const double lower = norm_lower_bound(c1, d, r_plus);
    if (std::isfinite(lower)) observe(rep.norm_lower, norm, lower);

    const int b = ds.b(i);
    const double same = b > 0 ? proj_plus(i) : proj_minus(i);
    const double cross = b > 0 ? proj_minus(i) : proj_plus(i);
    observe(rep.same_group, r_plus / 2.0, std::abs(same - r_plus));
    const double cross_dev = std::abs(cross - r_minus);
    observe(rep.cross_group, c1 * std::sqrt(r_plus * log_term), cross_dev);
    max_cross = std::max(max_cross, cross_dev);
  }

  rep.norm_upper.required_c1 = std::max(1.0, max_norm_ratio);
  rep.cross_group.required_c1 = std::max(1.0, max_cross / std::sqrt(r_plus * log_term));
  rep.same_group.required_c1 = rep.same_group.pass ? 1.0 : kInf;

  // The lower-norm bound only loosens as c1 grows; bisect on the boundary.
  auto lower_ok = [&](double c) { return min_norm >= norm_lower_bound(c, d, r_plus); };
  if (lower_ok(1.0)) {
    rep.norm_lower.required_c1 = 1.0;
  } else {
    double lo = 1.0;
    double hi = std::sqrt(std::max(d / r_plus, r_plus / d)) * (1.0 + 1e-12) + 1e-12;
    while (!lower_ok(hi)) hi *= 2.0;
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      (lower_ok(mid) ? hi : lo) = mid;
    }
    rep.norm_lower.required_c1 = hi;
  }

  const Matrix gram = ds.z * ds.z.transpose();
  const double pair_scale = std::sqrt(d * log_term);
  double max_pair = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double target = ds.b(i) == ds.b(j) ? r_plus : r_minus;
      const double dev = std::abs(gram(i, j) - target);
      observe(rep.pairwise, c1 * pair_scale, dev);
      max_pair = std::max(max_pair, dev);
    }
  }
  rep.pairwise.required_c1 = std::max(1.0, max_pair / pair_scale);

  rep.overall = true;
  rep.smallest_c1 = 1.0;
  for (const InequalityCheck* c : rep.checks()) {
    rep.overall = rep.overall && c->pass;
    rep.smallest_c1 = std::max(rep.smallest_c1, c->required_c1);
  }
  return rep;
}

AssumptionReport assumption_check(const ProblemSpec& spec, int d, const DiagnosticsConfig& cfg) {
  validate(cfg);
  const double n = spec.n();
  const double core = spec.mu_core.squaredNorm();
  const double r_plus = snr_summary(spec).r_plus;
  const double log_n = std::log(n / cfg.delta);
  const double C = cfg.C;
  AssumptionReport rep;
  rep.a = n >= C * std::log(1.0 / cfg.delta);
  rep.b = core >= C * log_n;
  rep.c = d >= C * r_plus * n;
  rep.d = d >= C * n * n * log_n;
  rep.largest_C = std::min({n / std::log(1.0 / cfg.delta), core / log_n, d / (r_plus * n),
                            d / (n * n * log_n)});
  return rep;
}

SeparabilityWitness separability_witness(const Dataset& ds) {
  const int dc = ds.spec.d_core;
  if (dc < 1 || dc > ds.d()) throw DimensionError("core block size does not fit the data");
  SeparabilityWitness out;
  out.w_tilde.w = Vector::Zero(ds.d());
  out.w_tilde.w.head(dc) = ds.z.leftCols(dc).colwise().sum().transpose();
  const double norm = out.w_tilde.w.norm();
  out.reference_scale = std::sqrt(static_cast<double>(ds.d()) / ds.n());
  if (norm == 0.0) {
    out.min_margin = 0.0;
    out.separable = false;
    return out;
  }
  out.min_margin = (ds.z * out.w_tilde.w).minCoeff() / norm;
  out.separable = out.min_margin > 0.0;
  return out;
}

RatioSeries ratio_monitor(const std::vector<Vector>& log_derivs, const Eigen::VectorXi& groups,
                          const GroupValues& deltas) {
  const Vector log_deltas = per_sample_deltas(groups, deltas).array().log().matrix();
  const Vector zero = Vector::Zero(groups.size());
  RatioSeries out;
  out.normalized.reserve(log_derivs.size());
  out.raw.reserve(log_derivs.size());
  for (const Vector& lg : log_derivs) {
    if (lg.size() != groups.size()) throw DimensionError("derivative record has the wrong length");
    out.normalized.push_back(max_normalized_ratio(lg, log_deltas));
    out.raw.push_back(max_normalized_ratio(lg, zero));
  }
  return out;
}

MarginEquality margin_equality_check(const Dataset& ds, const GroupValues& deltas,
                                     const Classifier& w, double tol) {
  const Vector m = scaled_margins(ds, deltas, w);
  MarginEquality out;
  out.spread = (m.maxCoeff() - m.minCoeff()) / m.mean();
  out.pass = out.spread <= tol;
  return out;
}

double comparison_constant(double log_Lp_plus, double log_Lp_minus, double r_ratio, double c1,
                           double C) {
  const double e = r_ratio - c1 / C;
  const double total = log_add_exp(log_Lp_plus, log_Lp_minus);
  const double frac_plus = std::exp(log_Lp_plus - total);
  const double frac_minus = std::exp(log_Lp_minus - total);
  return std::min(0.5 * frac_plus + e * frac_minus, 0.5 * frac_minus + e * frac_plus);
}

CorrelationEnvelope correlation_envelope(const TelemetryPoint& p, const TelemetryPoint& start,
                                         double eta, double r_plus, double r_minus, int d,
                                         const DiagnosticsConfig& cfg) {
  const double e = r_minus / r_plus - cfg.c1 / cfg.C;
  const double cum_plus = std::exp(p.log_cum_Lp_plus);
  const double cum_minus = std::exp(p.log_cum_Lp_minus);
  CorrelationEnvelope env;
  env.rho_lower_plus = start.rho_plus + eta * r_plus * (0.5 * cum_plus + e * cum_minus);
  env.rho_lower_minus = start.rho_minus + eta * r_plus * (0.5 * cum_minus + e * cum_plus);
  env.norm_upper = start.norm_w + eta * cfg.c1 * std::max(std::sqrt(static_cast<double>(d)),
                                                          std::sqrt(r_plus)) *
                                      (cum_plus + cum_minus);
  return env;
}

}  // namespace vslab
