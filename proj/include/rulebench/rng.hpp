#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace rulebench {

// splitmix64, used to derive independent stream seeds from one base seed.
inline std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Deterministic RNG wrapper. mt19937_64 output is fixed by the standard and
// the derived draws below avoid the implementation-defined std distributions,
// so streams are reproducible across platforms and stdlib versions.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : base_(seed), engine_(mix_seed(seed)) {}

  std::uint64_t next_u64() { return engine_(); }

  // uniform in [0, n), rejection-sampled to avoid modulo bias
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  // uniform double in [0, 1)
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  // Box-Muller; the spare sample is discarded to keep the state minimal
  double gaussian(double mean, double stddev) {
    double u1 = unit();
    while (u1 <= 0.0) u1 = unit();
    const double u2 = unit();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return mean + stddev * r * std::cos(6.283185307179586476925287 * u2);
  }

  bool bernoulli(double p) { return unit() < p; }

  // derive an independently seeded generator for a named substream
  Rng split(std::uint64_t stream) const {
    return Rng(mix_seed(base_ ^ mix_seed(stream ^ 0xa0761d6478bd642fULL)));
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::uint64_t base_;
  std::mt19937_64 engine_;
};

}  // namespace rulebench
