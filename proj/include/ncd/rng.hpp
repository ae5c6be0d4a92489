#ifndef NCD_RNG_HPP
#define NCD_RNG_HPP

#include <cstdint>
#include <random>
#include <vector>

namespace ncd {

// Deterministic PRNG with explicit seed threading. The engine is mt19937_64
// (bit-exact across platforms); all floating-point draws are derived from raw
// 64-bit words here rather than through std:: distributions, whose output is
// implementation-defined. Identical seed -> identical stream, including the
// derived substreams from stream().
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t seed() const { return seed_; }

  std::uint64_t next_u64();

  // Uniform in [0, 1), 53-bit resolution.
  double next_double();

  // Uniform in (0, 1): never returns an exact endpoint.
  double next_open01();

  double uniform(double lo, double hi);

  // Standard normal via Box-Muller; the spare draw is cached.
  double normal();
  double normal(double mean, double stddev);

  // Uniform integer in [lo, hi], inclusive. Requires lo <= hi.
  int uniform_int(int lo, int hi);

  // Uniform in [0, n). Rejection sampling, no modulo bias. Requires n > 0.
  std::uint64_t uniform_below(std::uint64_t n);

  // Fisher-Yates shuffle driven by uniform_below.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(uniform_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // Independent deterministic substream keyed by (seed, stream_id). Used to
  // give e.g. each student its own split stream regardless of call order.
  Rng stream(std::uint64_t stream_id) const;

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

// SplitMix64 mixing step; also used to derive substream seeds.
std::uint64_t splitmix64(std::uint64_t x);

}  // namespace ncd

#endif  // NCD_RNG_HPP
