#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace pcgkit {

// Seeded generator with distribution helpers implemented locally, so a
// given seed yields the same stream regardless of the standard library.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }
  // Uniform on [0, 1).
  double uniform();
  double uniform(double lo, double hi);
  // Uniform integer on [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);
  // Uniform integer on [lo, hi], inclusive.
  std::int64_t integer(std::int64_t lo, std::int64_t hi);
  bool bernoulli(double p);
  double normal();

  template <typename T>
  void shuffle(T& items) {
    for (std::size_t i = items.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      using std::swap;
      swap(items[i - 1], items[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t x);
std::uint64_t fnv1a64(std::string_view text);

// Seed for a named sub-stream of a root seed (e.g. one per chunk id).
std::uint64_t derive_seed(std::uint64_t root, std::string_view key);
std::uint64_t derive_seed(std::uint64_t root, std::uint64_t a, std::uint64_t b);

}  // namespace pcgkit
