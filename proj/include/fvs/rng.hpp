#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

namespace fvs {

// Deterministic PRNG (xoshiro256++) with named substreams. Distributions are
// implemented here rather than taken from <random> so that every byte the
// toolkit emits depends only on the seed, not on the standard library build.
//
// All randomness in the pipeline flows from one root seed through substreams
// named after the consumer ("synth", "selection", "init", "shuffle", ...),
// so components stay independently reproducible.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  // Derives an independent stream from this stream's key. The same
  // (name, index) pair always yields the same stream.
  Rng substream(std::string_view name, std::uint64_t index = 0) const;

  std::uint64_t next_u64();

  // Uniform double in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi);

  // Uniform integer in [lo, hi], inclusive.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi);

  // Box-Muller; consumes two uniforms per call (no cached spare).
  double normal(double mu = 0.0, double sigma = 1.0);

  // Knuth's method; fine for the desk-scale lambdas used here.
  int poisson(double lambda);

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(
          uniform_int(0, static_cast<std::int64_t>(i) - 1));
      std::swap(v[i - 1], v[j]);
    }
  }

  std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_;
  std::array<std::uint64_t, 4> s_;
};

}  // namespace fvs
