#pragma once

#include <cstdint>
#include <vector>

namespace s2st {

/// Seeded splitmix64 generator. All randomness in the project flows through
/// this type so runs are bit-reproducible across platforms; std:: distributions
/// are implementation-defined and are not used.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();

  /// Uniform in [0, 1), 53-bit resolution.
  double uniform();
  double uniform(double lo, double hi);

  /// Standard normal via Box-Muller (second draw cached).
  double normal();
  double normal(double mean, double stddev);

  /// Uniform integer in [lo, hi] inclusive.
  int uniform_int(int lo, int hi);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_int(0, static_cast<int>(i) - 1));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t state_;
  bool have_cached_ = false;
  double cached_ = 0.0;
};

/// Stable mix of two 64-bit values, used to derive per-item sub-seeds.
std::uint64_t hash_mix(std::uint64_t a, std::uint64_t b);
std::uint64_t hash_str(const char* s);

}  // namespace s2st
