#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace sgood {

// Deterministic 64-bit generator (splitmix64 core). std:: distributions are
// implementation-defined, so every draw here is hand-rolled to keep runs
// reproducible across compilers and platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();

  // Uniform in [0, n); n must be positive. Rejection sampling, no modulo bias.
  std::uint64_t uniform(std::uint64_t n);

  // Uniform in [0, 1).
  double uniform_real();
  // Uniform in [lo, hi).
  double uniform_real(double lo, double hi);

  template <typename T>
  void shuffle(std::vector<T>& values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(uniform(i));
      std::swap(values[i - 1], values[j]);
    }
  }

  // k distinct values from [0, n), in draw order.
  std::vector<int> sample_without_replacement(int n, int k);

 private:
  std::uint64_t state_;
};

// Stable seed for a named substream, e.g. derive_seed(seed, "init/clf.w").
std::uint64_t derive_seed(std::uint64_t base, std::string_view name);

std::uint64_t hash64(std::uint64_t x);
std::uint64_t hash_combine(std::uint64_t h, std::uint64_t v);

}  // namespace sgood
