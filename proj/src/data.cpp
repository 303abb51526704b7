#include "vslab/data.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <sstream>

namespace vslab {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

RngStream::RngStream(std::uint64_t seed, std::uint64_t stream_id)
    : seed_(seed),
      stream_id_(stream_id),
      engine_(splitmix64(splitmix64(seed) ^ (stream_id * 0xd1b54a32d192ed03ULL))) {}

double RngStream::uniform() {
  // 53 random bits mapped to the centre of their bucket, never 0 or 1.
  const std::uint64_t bits = engine_() >> 11;
  return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

double RngStream::normal() {
  if (has_cached_) {
    has_cached_ = false;
    return cached_;
  }
  const double u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  cached_ = radius * std::sin(angle);
  has_cached_ = true;
  return radius * std::cos(angle);
}

void RngStream::fill_normal(Eigen::Ref<Vector> out) {
  for (Eigen::Index k = 0; k < out.size(); ++k) out(k) = normal();
}

Sample Dataset::sample(int i) const {
  Sample s;
  s.z = z.row(i).transpose();
  s.y = y(i);
  s.a = a(i);
  s.b = b(i);
  s.flipped = flipped[static_cast<std::size_t>(i)];
  return s;
}

GroupPair<int> Dataset::observed_counts() const {
  GroupPair<int> counts;
  for (int i = 0; i < n(); ++i) ++counts[b(i)];
  return counts;
}

std::pair<int, int> group_sizes(int n, double tau) {
  if (n < 2) throw ConfigError("need n >= 2 to split into two groups");
  if (!(tau >= 1.0) || !std::isfinite(tau)) throw ConfigError("tau must be finite and >= 1");
  const int n_minus = std::max(1, static_cast<int>(std::lround(n / (tau + 1.0))));
  return {n - n_minus, n_minus};
}

namespace {

// Labels alternate +1, -1, ... within each group.
void assign_groups(Dataset& ds, int n_plus, int n_minus) {
  const int n = n_plus + n_minus;
  ds.y.resize(n);
  ds.a.resize(n);
  ds.b.resize(n);
  for (int i = 0; i < n; ++i) {
    const int group = i < n_plus ? 1 : -1;
    const int offset = i < n_plus ? i : i - n_plus;
    const int label = offset % 2 == 0 ? 1 : -1;
    ds.y(i) = label;
    ds.a(i) = group * label;
    ds.b(i) = group_of(ds.y(i), ds.a(i));
  }
}

}  // namespace

Dataset sample_dataset(const ProblemSpec& spec, std::uint64_t seed,
                       const SamplingLimits& limits) {
  validate(spec);
  const int n = spec.n();
  const int d = spec.d();
  if (static_cast<std::int64_t>(n) * d > limits.max_entries)
    throw ConfigError("dataset of " + std::to_string(n) + " x " + std::to_string(d) +
                      " exceeds the configured memory bound of " +
                      std::to_string(limits.max_entries) + " entries");

  int n_plus = spec.n_plus;
  int n_minus = spec.n_minus;
  if (spec.sampling_mode == SamplingMode::probabilistic) {
    RngStream groups(seed, kGroupStream);
    n_plus = 0;
    for (int i = 0; i < n; ++i)
      if (groups.uniform() < spec.pi_plus) ++n_plus;
    n_minus = n - n_plus;
  }

  Dataset ds;
  ds.spec = spec;
  ds.spec.n_plus = n_plus;
  ds.spec.n_minus = n_minus;
  ds.seed = seed;
  ds.nu = build_nu(spec);
  assign_groups(ds, n_plus, n_minus);
  ds.flipped.assign(static_cast<std::size_t>(n), false);

  // Each row owns its stream, so rows can be generated in any order.
  ds.z.resize(n, d);
  Vector q(d);
  for (int i = 0; i < n; ++i) {
    RngStream rng(seed, static_cast<std::uint64_t>(i));
    rng.fill_normal(q);
    ds.z.row(i) = (ds.nu[ds.b(i)] + q).transpose();
  }

  if (spec.label_flip_rate > 0.0) return flip_labels(ds, spec.label_flip_rate, seed);
  return ds;
}

Dataset flip_labels(const Dataset& ds, double xi, std::uint64_t seed) {
  if (!(xi >= 0.0 && xi <= 1.0)) throw ConfigError("flip rate must lie in [0, 1]");
  Dataset out = ds;
  for (int i = 0; i < out.n(); ++i) {
    RngStream rng(seed, kFlipStreamBase + static_cast<std::uint64_t>(i));
    // xi = 1 must flip everything; uniform() < 1 always holds.
    if (rng.uniform() < xi) {
      out.y(i) = -out.y(i);
      out.b(i) = group_of(out.y(i), out.a(i));
      out.z.row(i) *= -1.0;
      out.flipped[static_cast<std::size_t>(i)] = !out.flipped[static_cast<std::size_t>(i)];
    }
  }
  return out;
}

Sample sample_test_point(const ProblemSpec& spec, int b, RngStream& rng) {
  if (b != 1 && b != -1) throw ConfigError("group must be +1 or -1");
  const NuPair nu = build_nu(spec);
  Sample s;
  s.z.resize(spec.d());
  rng.fill_normal(s.z);
  s.z += nu[b];
  s.b = b;
  s.y = 1;
  s.a = b;
  return s;
}

namespace {

std::string canonical_spec(const ProblemSpec& spec) {
  std::ostringstream os;
  os.precision(17);
  os << "d_core=" << spec.d_core << ";d_spur=" << spec.d_spur << ";mu_core=";
  for (double v : spec.mu_core) os << v << ',';
  os << ";mu_spur=";
  for (double v : spec.mu_spur) os << v << ',';
  os << ";n_plus=" << spec.n_plus << ";n_minus=" << spec.n_minus
     << ";xi=" << spec.label_flip_rate
     << ";mode=" << (spec.sampling_mode == SamplingMode::fixed_counts ? "fixed" : "prob")
     << ";pi_plus=" << spec.pi_plus;
  return os.str();
}

}  // namespace

std::uint64_t spec_hash(const ProblemSpec& spec) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical_spec(spec)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string spec_hash_hex(const ProblemSpec& spec) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(spec_hash(spec)));
  return buf;
}

void write_dataset(const Dataset& ds, std::ostream& os) {
  os << "# vslab-dataset v1 n=" << ds.n() << " d=" << ds.d() << " seed=" << ds.seed
     << " spec_hash=" << spec_hash_hex(ds.spec) << '\n';
  char buf[32];
  for (int i = 0; i < ds.n(); ++i) {
    os << ds.y(i) << ' ' << ds.a(i) << ' ' << ds.b(i) << ' '
       << (ds.flipped[static_cast<std::size_t>(i)] ? 1 : 0);
    for (int k = 0; k < ds.d(); ++k) {
      std::snprintf(buf, sizeof buf, " %.17g", ds.z(i, k));
      os << buf;
    }
    os << '\n';
  }
}

}  // namespace vslab
