#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <optional>

// Exhaustive active-set solver for min ||w|| s.t. d_i <z_i, w> >= 1.
// For every nonempty subset S it solves the equality-constrained min-norm
// problem restricted to span{z_i : i in S} and keeps the smallest feasible
// candidate. Exponential in n; intended for n <= 10.
namespace oracle {

struct Result {
  Eigen::VectorXd w;
  double norm = std::numeric_limits<double>::infinity();
};

inline std::optional<Result> brute_force_svm(const Eigen::MatrixXd& z, const Eigen::VectorXd& d,
                                             double feas_tol = 1e-9) {
  const int n = static_cast<int>(z.rows());
  std::optional<Result> best;
  for (unsigned mask = 1; mask < (1u << n); ++mask) {
    std::vector<int> idx;
    for (int i = 0; i < n; ++i)
      if (mask & (1u << i)) idx.push_back(i);
    const int k = static_cast<int>(idx.size());
    Eigen::MatrixXd a(k, z.cols());
    Eigen::VectorXd rhs(k);
    for (int r = 0; r < k; ++r) {
      a.row(r) = d(idx[r]) * z.row(idx[r]);
      rhs(r) = 1.0;
    }
    // Minimum-norm solution of a w = 1 via complete orthogonal decomposition.
    const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(a);
    const Eigen::VectorXd w = cod.solve(rhs);
    if ((a * w - rhs).norm() > 1e-8) continue;
    const Eigen::VectorXd m = (z * w).cwiseProduct(d);
    if (m.minCoeff() < 1.0 - feas_tol) continue;
    if (!best || w.norm() < best->norm) best = Result{w, w.norm()};
  }
  return best;
}

}  // namespace oracle
