#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>

#include "vslab/error.hpp"

namespace vslab {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

template <typename Scalar>
using VectorX = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// A value attached to each of the two groups b = +1 (majority, a = y)
/// and b = -1 (minority, a = -y).
template <typename Scalar>
struct GroupPair {
  Scalar plus{};
  Scalar minus{};

  Scalar operator[](int b) const { return b > 0 ? plus : minus; }
  Scalar& operator[](int b) { return b > 0 ? plus : minus; }
};

using GroupValues = GroupPair<double>;

enum class SamplingMode { fixed_counts, probabilistic };

/// Generative description of the two-block Gaussian mixture
///   x | (y, a) ~ N([y mu_core; a mu_spur], I_d).
struct ProblemSpec {
  int d_core = 1;
  int d_spur = 1;
  Vector mu_core;
  Vector mu_spur;
  int n_plus = 0;
  int n_minus = 0;
  double label_flip_rate = 0.0;
  SamplingMode sampling_mode = SamplingMode::fixed_counts;
  /// P(b = +1) in probabilistic mode.
  double pi_plus = 0.5;

  int d() const { return d_core + d_spur; }
  int n() const { return n_plus + n_minus; }
  std::optional<double> tau() const {
    if (n_minus == 0) return std::nullopt;
    return static_cast<double>(n_plus) / n_minus;
  }
};

/// Throws ConfigError / DimensionError / DegenerateModelError.
void validate(const ProblemSpec& spec);

/// One training or test point, stored in signed form z = y x.
struct Sample {
  Vector z;
  int b = 1;
  int y = 1;
  int a = 1;
  bool flipped = false;
};

/// A linear classifier f(x) = <w, x>.
struct Classifier {
  Vector w;
};

struct NuPair {
  Vector plus;
  Vector minus;

  const Vector& operator[](int b) const { return b > 0 ? plus : minus; }
};

/// nu_+ = [mu_c; mu_s], nu_- = [mu_c; -mu_s].
NuPair build_nu(const ProblemSpec& spec);

inline int group_of(int y, int a) {
  if ((y != 1 && y != -1) || (a != 1 && a != -1))
    throw ConfigError("group_of: labels and attributes must be +1 or -1");
  return y * a;
}

struct SnrSummary {
  double r_plus = 0;
  double r_minus = 0;
  double ratio = 0;
};

SnrSummary snr_summary(const ProblemSpec& spec);

/// Normalized correlation <w / ||w||, v>.
template <typename DerivedW, typename DerivedV>
typename DerivedW::Scalar normalized_correlation(
    const Eigen::MatrixBase<DerivedW>& w, const Eigen::MatrixBase<DerivedV>& v) {
  return w.dot(v) / w.norm();
}

/// Builds the standard two-block spec used by the experiment presets:
/// equal block split, both means on the first coordinate of their block,
/// ||mu_c||^2 = R+(1+r)/2 and ||mu_s||^2 = R+(1-r)/2.
ProblemSpec make_block_spec(int d, double r_plus, double r_ratio, int n_plus,
                            int n_minus, double label_flip_rate = 0.0);

}  // namespace vslab
