#include "vslab/cs_svm.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <cstdio>
#include <ostream>

#include "vslab/losses.hpp"

namespace vslab {

std::string to_string(SvmSolver s) { return s == SvmSolver::dual_cd ? "dual_cd" : "min_norm"; }

namespace {

// Projected gradient of the dual at coordinate i; g_i = m_i - 1.
double projected_gradient(double alpha_i, double g_i) {
  return alpha_i > 0.0 ? std::abs(g_i) : std::max(0.0, -g_i);
}

void finalize(SvmSolution& sol, const Matrix& scaled, const SvmOptions& opts) {
  sol.w.w = scaled.transpose() * sol.alpha;
  const Vector margins = scaled * sol.w.w;
  const Eigen::Index n = margins.size();
  sol.kkt_max_violation = 0.0;
  sol.active_set.assign(static_cast<std::size_t>(n), false);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double g = margins(i) - 1.0;
    sol.kkt_max_violation = std::max(sol.kkt_max_violation, projected_gradient(sol.alpha(i), g));
    sol.active_set[static_cast<std::size_t>(i)] = std::abs(g) <= opts.active_tol;
  }
}

}  // namespace

SvmSolution solve_cs_svm(const Matrix& z, const Vector& row_deltas, const SvmOptions& opts) {
  const Eigen::Index n = z.rows();
  if (n < 1) throw ConfigError("CS-SVM needs at least one sample");
  if (row_deltas.size() != n) throw DimensionError("one Delta per sample required");
  if (!(row_deltas.array() > 0.0).all()) throw ConfigError("Delta must be positive");
  if (!(opts.tol > 0.0) || opts.max_passes < 1) throw ConfigError("invalid SVM options");

  const Matrix scaled = row_deltas.asDiagonal() * z;

  if (opts.try_min_norm && z.cols() >= n) {
    try {
      const MinNormResult mn = min_norm_solve(z, row_deltas, opts.cond_threshold);
      if ((mn.coefficients.array() >= 0.0).all()) {
        SvmSolution sol;
        sol.solver_used = SvmSolver::min_norm;
        sol.alpha = mn.coefficients.cwiseQuotient(row_deltas);
        finalize(sol, scaled, opts);
        if (sol.kkt_max_violation <= opts.tol) return sol;
      }
    } catch (const RankDeficiencyError&) {
      // fall through to the dual solver
    }
  }

  const Matrix gram = scaled * scaled.transpose();
  for (Eigen::Index i = 0; i < n; ++i)
    if (!(gram(i, i) > 0.0))
      throw NonSeparableError("sample " + std::to_string(i) +
                              " is zero and cannot satisfy its margin constraint");

  SvmSolution sol;
  sol.alpha = Vector::Zero(n);
  Vector grad = -Vector::Ones(n);  // G alpha - 1
  const double ceiling = opts.ceiling_factor * static_cast<double>(n);

  for (int pass = 1; pass <= opts.max_passes; ++pass) {
    for (Eigen::Index i = 0; i < n; ++i) {
      if (projected_gradient(sol.alpha(i), grad(i)) == 0.0) continue;
      const double updated = std::max(0.0, sol.alpha(i) - grad(i) / gram(i, i));
      const double step = updated - sol.alpha(i);
      if (step == 0.0) continue;
      sol.alpha(i) = updated;
      grad.noalias() += step * gram.col(i);
    }
    // Refresh to stop rounding drift in the running gradient.
    grad.noalias() = gram * sol.alpha;
    grad.array() -= 1.0;
    sol.passes = pass;

    if (!sol.alpha.allFinite() || sol.alpha.sum() > ceiling)
      throw NonSeparableError("dual variables exceeded the divergence ceiling; "
                              "the data are not separable by a homogeneous classifier");

    double violation = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
      violation = std::max(violation, projected_gradient(sol.alpha(i), grad(i)));
    if (violation <= opts.tol) {
      finalize(sol, scaled, opts);
      return sol;
    }
  }
  finalize(sol, scaled, opts);
  throw SvmTimeoutError("CS-SVM dual coordinate ascent hit max_passes = " +
                            std::to_string(opts.max_passes) + " with KKT violation " +
                            std::to_string(sol.kkt_max_violation),
                        sol);
}

SvmSolution solve_cs_svm(const Dataset& ds, const GroupValues& deltas, const SvmOptions& opts) {
  return solve_cs_svm(ds.z, per_sample_deltas(ds.b, deltas), opts);
}

MinNormResult min_norm_solve(const Matrix& z, const Vector& row_deltas, double cond_threshold) {
  if (row_deltas.size() != z.rows()) throw DimensionError("one Delta per sample required");
  const Matrix gram = z * z.transpose();
  const Eigen::LLT<Matrix> llt(gram);
  if (llt.info() != Eigen::Success)
    throw RankDeficiencyError("Gram matrix is not positive definite");
  MinNormResult out;
  out.rcond = llt.rcond();
  if (!(out.rcond > 0.0) || 1.0 / out.rcond > cond_threshold)
    throw RankDeficiencyError("Gram matrix condition estimate exceeds the threshold");
  out.coefficients = llt.solve(row_deltas.cwiseInverse());
  out.w.w = z.transpose() * out.coefficients;
  return out;
}

Classifier min_norm_interpolator(const Dataset& ds, const GroupValues& deltas,
                                 double cond_threshold) {
  return min_norm_solve(ds.z, per_sample_deltas(ds.b, deltas), cond_threshold).w;
}

Vector scaled_margins(const Dataset& ds, const GroupValues& deltas, const Classifier& w) {
  if (w.w.size() != ds.d()) throw DimensionError("classifier and data dimensions differ");
  const double norm = w.w.norm();
  if (!(norm > 0.0)) throw ConfigError("scaled margins are undefined for a zero classifier");
  return per_sample_deltas(ds.b, deltas).cwiseProduct(ds.z * w.w) / norm;
}

double KktReport::max_violation() const {
  return std::max({stationarity, primal, dual, complementary});
}

KktReport certify_kkt(const Matrix& z, const Vector& row_deltas, const SvmSolution& sol) {
  const Matrix scaled = row_deltas.asDiagonal() * z;
  const Vector margins = scaled * sol.w.w;
  KktReport r;
  const double wn = std::max(sol.w.w.norm(), 1e-300);
  r.stationarity = (sol.w.w - scaled.transpose() * sol.alpha).norm() / wn;
  const double amax = std::max(1.0, sol.alpha.maxCoeff());
  for (Eigen::Index i = 0; i < margins.size(); ++i) {
    r.primal = std::max(r.primal, 1.0 - margins(i));
    r.dual = std::max(r.dual, -sol.alpha(i));
    r.complementary =
        std::max(r.complementary, sol.alpha(i) * std::abs(margins(i) - 1.0) / amax);
  }
  return r;
}

KktReport certify_kkt(const Dataset& ds, const GroupValues& deltas, const SvmSolution& sol) {
  return certify_kkt(ds.z, per_sample_deltas(ds.b, deltas), sol);
}

void write_svm_csv(const Dataset& ds, const GroupValues& deltas, const SvmSolution& sol,
                   std::ostream& os) {
  const Vector margins = scaled_margins(ds, deltas, sol.w);
  os << "i,alpha,scaled_margin\n";
  char buf[128];
  for (int i = 0; i < ds.n(); ++i) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g\n", i, sol.alpha(i), margins(i));
    os << buf;
  }
  std::snprintf(buf, sizeof buf, "# kkt_max_violation=%.17g\n", sol.kkt_max_violation);
  os << buf;
}

}  // namespace vslab
