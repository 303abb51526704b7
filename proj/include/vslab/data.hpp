#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "vslab/model.hpp"

namespace vslab {

/// Deterministic standard-normal stream keyed by (seed, stream_id).
///
/// Uniforms come from a 64-bit Mersenne Twister whose seed is a splitmix64
/// mix of both keys; normals use the Box-Muller transform on 53-bit
/// uniforms in (0, 1). Identical keys replay identical sequences on any
/// platform sharing the same libm.
class RngStream {
 public:
  RngStream(std::uint64_t seed, std::uint64_t stream_id);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  /// Uniform in the open interval (0, 1).
  double uniform();
  double normal();
  void fill_normal(Eigen::Ref<Vector> out);

 private:
  std::uint64_t seed_;
  std::uint64_t stream_id_;
  std::mt19937_64 engine_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Stream ids reserved for the flip and group-assignment sub-streams.
inline constexpr std::uint64_t kFlipStreamBase = std::uint64_t{1} << 62;
inline constexpr std::uint64_t kGroupStream = std::uint64_t{1} << 61;
inline constexpr std::uint64_t kTestStreamBase = std::uint64_t{3} << 62;

/// Realized training set. Row i of `z` is the signed sample z_i = y_i x_i.
struct Dataset {
  Matrix z;
  Eigen::VectorXi y;
  Eigen::VectorXi a;
  Eigen::VectorXi b;
  std::vector<bool> flipped;
  NuPair nu;
  ProblemSpec spec;
  std::uint64_t seed = 0;

  int n() const { return static_cast<int>(z.rows()); }
  int d() const { return static_cast<int>(z.cols()); }
  Sample sample(int i) const;
  /// Group sizes counted from the stored (possibly flipped) labels.
  GroupPair<int> observed_counts() const;
};

struct SamplingLimits {
  /// Upper bound on n * d stored doubles.
  std::int64_t max_entries = std::int64_t{1} << 28;
};

/// Group sizes for a total n and imbalance ratio tau:
/// n_minus = max(1, round(n / (tau + 1))), n_plus = n - n_minus.
std::pair<int, int> group_sizes(int n, double tau);

Dataset sample_dataset(const ProblemSpec& spec, std::uint64_t seed,
                       const SamplingLimits& limits = {});

/// Negates each label independently with probability xi. Flipping y
/// negates z and b.
Dataset flip_labels(const Dataset& ds, double xi, std::uint64_t seed);

/// Draws z = nu_b + q for a clean test point from group b.
Sample sample_test_point(const ProblemSpec& spec, int b, RngStream& rng);

/// 64-bit FNV-1a over a canonical text rendering of the spec.
std::uint64_t spec_hash(const ProblemSpec& spec);
std::string spec_hash_hex(const ProblemSpec& spec);

/// Text dump: one header line
///   # vslab-dataset v1 n=<n> d=<d> seed=<seed> spec_hash=<hex>
/// followed by one row per sample: y a b flipped z_1 ... z_d.
void write_dataset(const Dataset& ds, std::ostream& os);

}  // namespace vslab
