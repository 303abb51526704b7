#pragma once

#include "vslab/config.hpp"

namespace testing {

inline vslab::ProblemSpec make_spec(const vslab::Vector& mu_core, const vslab::Vector& mu_spur,
                                    int n_plus, int n_minus) {
  vslab::ProblemSpec s;
  s.d_core = static_cast<int>(mu_core.size());
  s.d_spur = static_cast<int>(mu_spur.size());
  s.mu_core = mu_core;
  s.mu_spur = mu_spur;
  s.n_plus = n_plus;
  s.n_minus = n_minus;
  return s;
}

inline vslab::Vector vec(std::initializer_list<double> v) {
  vslab::Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

// Fig. 2 preset spec at dimension d.
inline vslab::ProblemSpec fig2_spec(int d, double tau = 50.0, double xi = 0.0) {
  vslab::ProblemConfig pc;
  pc.d = d;
  pc.tau = tau;
  pc.label_flip_rate = xi;
  return vslab::problem_spec(pc);
}

// Dataset whose rows are given directly; groups all +1 unless supplied.
inline vslab::Dataset manual_dataset(const vslab::Matrix& z, const Eigen::VectorXi& b) {
  vslab::Dataset ds;
  ds.z = z;
  ds.b = b;
  ds.y = Eigen::VectorXi::Ones(z.rows());
  ds.a = b;
  ds.flipped.assign(z.rows(), false);
  int n_plus = 0;
  for (int i = 0; i < b.size(); ++i) n_plus += b(i) > 0;
  vslab::Vector mc = vslab::Vector::Zero((z.cols() + 1) / 2);
  mc(0) = 1.0;
  ds.spec = make_spec(mc, vslab::Vector::Zero(z.cols() / 2), n_plus,
                      static_cast<int>(b.size()) - n_plus);
  ds.nu = vslab::build_nu(ds.spec);
  return ds;
}

}  // namespace testing
