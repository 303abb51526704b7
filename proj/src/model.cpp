#include "vslab/model.hpp"

#include <cmath>
#include <string>

namespace vslab {

void validate(const ProblemSpec& spec) {
  if (spec.d_core < 1 || spec.d_spur < 1)
    throw DimensionError("d_core and d_spur must both be at least 1");
  if (spec.mu_core.size() != spec.d_core)
    throw DimensionError("mu_core has length " + std::to_string(spec.mu_core.size()) +
                         ", expected d_core = " + std::to_string(spec.d_core));
  if (spec.mu_spur.size() != spec.d_spur)
    throw DimensionError("mu_spur has length " + std::to_string(spec.mu_spur.size()) +
                         ", expected d_spur = " + std::to_string(spec.d_spur));
  if (spec.n_plus < 0 || spec.n_minus < 0)
    throw ConfigError("group sizes must be non-negative");
  if (spec.n() < 1) throw ConfigError("the training set must contain at least one sample");
  if (!(spec.label_flip_rate >= 0.0 && spec.label_flip_rate <= 1.0))
    throw ConfigError("label_flip_rate must lie in [0, 1]");
  if (!(spec.pi_plus >= 0.0 && spec.pi_plus <= 1.0))
    throw ConfigError("pi_plus must lie in [0, 1]");
  if (!spec.mu_core.allFinite() || !spec.mu_spur.allFinite())
    throw ConfigError("means must be finite");
  if (spec.mu_core.squaredNorm() + spec.mu_spur.squaredNorm() <= 0.0)
    throw DegenerateModelError("R+ = 0: both means are zero");
}

NuPair build_nu(const ProblemSpec& spec) {
  if (spec.mu_core.size() != spec.d_core || spec.mu_spur.size() != spec.d_spur)
    throw DimensionError("mean vectors do not match the block dimensions");
  NuPair nu;
  nu.plus.resize(spec.d());
  nu.plus << spec.mu_core, spec.mu_spur;
  nu.minus.resize(spec.d());
  nu.minus << spec.mu_core, -spec.mu_spur;
  return nu;
}

SnrSummary snr_summary(const ProblemSpec& spec) {
  const double core = spec.mu_core.squaredNorm();
  const double spur = spec.mu_spur.squaredNorm();
  SnrSummary s;
  s.r_plus = core + spur;
  s.r_minus = core - spur;
  if (s.r_plus <= 0.0) throw DegenerateModelError("R+ = 0: both means are zero");
  s.ratio = s.r_minus / s.r_plus;
  return s;
}

ProblemSpec make_block_spec(int d, double r_plus, double r_ratio, int n_plus,
                            int n_minus, double label_flip_rate) {
  if (d < 2) throw DimensionError("total dimension must be at least 2");
  if (!(r_plus > 0.0)) throw DegenerateModelError("R+ must be positive");
  if (!(r_ratio >= -1.0 && r_ratio <= 1.0)) throw ConfigError("R-/R+ must lie in [-1, 1]");
  ProblemSpec spec;
  spec.d_core = (d + 1) / 2;
  spec.d_spur = d / 2;
  spec.mu_core = Vector::Zero(spec.d_core);
  spec.mu_spur = Vector::Zero(spec.d_spur);
  spec.mu_core(0) = std::sqrt(r_plus * (1.0 + r_ratio) / 2.0);
  spec.mu_spur(0) = std::sqrt(r_plus * (1.0 - r_ratio) / 2.0);
  spec.n_plus = n_plus;
  spec.n_minus = n_minus;
  spec.label_flip_rate = label_flip_rate;
  return spec;
}

}  // namespace vslab
