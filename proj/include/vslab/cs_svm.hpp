#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "vslab/data.hpp"

namespace vslab {

enum class SvmSolver { dual_cd, min_norm };

std::string to_string(SvmSolver s);

/// Solution of the cost-sensitive hard-margin SVM
///   min ||w||  s.t.  Delta_{b_i} <z_i, w> >= 1  for all i.
struct SvmSolution {
  Classifier w;
  /// Dual variables for the scaled features Delta_{b_i} z_i.
  Vector alpha;
  /// max_i of the projected dual gradient: |m_i - 1| where alpha_i > 0,
  /// max(0, 1 - m_i) where alpha_i = 0, with m_i the scaled margin.
  double kkt_max_violation = 0;
  std::vector<bool> active_set;
  SvmSolver solver_used = SvmSolver::dual_cd;
  int passes = 0;

  double norm() const { return w.w.norm(); }
};

struct SvmOptions {
  double tol = 1e-10;
  int max_passes = 100000;
  /// Non-separability guard: sum(alpha) above ceiling_factor * n.
  double ceiling_factor = 1e12;
  /// |m_i - 1| below this marks constraint i as active.
  double active_tol = 1e-6;
  /// Try the min-norm interpolator first and keep it when every point is a
  /// support vector (all dual coefficients non-negative).
  bool try_min_norm = false;
  double cond_threshold = 1e12;
};

/// Thrown when max_passes runs out; carries the best iterate.
class SvmTimeoutError : public SolverTimeoutError {
 public:
  SvmTimeoutError(const std::string& what, SvmSolution best)
      : SolverTimeoutError(what), best_(std::move(best)) {}
  const SvmSolution& best() const { return best_; }

 private:
  SvmSolution best_;
};

SvmSolution solve_cs_svm(const Dataset& ds, const GroupValues& deltas,
                         const SvmOptions& opts = {});

/// Same program on raw rows (already signed) with explicit per-row Delta.
SvmSolution solve_cs_svm(const Matrix& z, const Vector& row_deltas,
                         const SvmOptions& opts = {});

struct MinNormResult {
  Classifier w;
  /// w = sum_i coefficients_i z_i.
  Vector coefficients;
  /// Reciprocal condition estimate of the Gram matrix.
  double rcond = 0;
};

/// w = Z^T G^{-1} u with G = Z Z^T and u_i = 1 / Delta_{b_i}, via Cholesky.
MinNormResult min_norm_solve(const Matrix& z, const Vector& row_deltas,
                             double cond_threshold = 1e12);
Classifier min_norm_interpolator(const Dataset& ds, const GroupValues& deltas,
                                 double cond_threshold = 1e12);

/// Delta_{b_i} <z_i, w / ||w||>.
Vector scaled_margins(const Dataset& ds, const GroupValues& deltas, const Classifier& w);

struct KktReport {
  double stationarity = 0;  // ||w - sum alpha_i Delta_i z_i|| / ||w||
  double primal = 0;        // max(0, 1 - m_i)
  double dual = 0;          // max(0, -alpha_i)
  double complementary = 0; // max alpha_i |m_i - 1| / max(1, max alpha)
  double max_violation() const;
};

KktReport certify_kkt(const Matrix& z, const Vector& row_deltas, const SvmSolution& sol);
KktReport certify_kkt(const Dataset& ds, const GroupValues& deltas, const SvmSolution& sol);

/// CSV rows i, alpha, scaled_margin, followed by a kkt_max_violation line.
void write_svm_csv(const Dataset& ds, const GroupValues& deltas, const SvmSolution& sol,
                   std::ostream& os);

}  // namespace vslab
