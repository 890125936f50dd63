#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

namespace rpkitor {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// Independent child seed for stream `index` of a master seed. Each run, day or
// population draw gets its own stream so they can execute in any order.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index = 0) {
  return splitmix64(splitmix64(master ^ splitmix64(stream)) + index);
}

// Uniform double in [0,1) from the top 53 bits; unlike std::uniform_real_distribution
// this is the same on every standard library.
inline double uniform01(Rng& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

// Uniform integer in [0, n) by rejection, portable across standard libraries.
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  const std::uint64_t limit = (~std::uint64_t{0}) - (~std::uint64_t{0}) % n;
  std::uint64_t x = 0;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

// Weighted sampling with point updates. A sum tree whose inner nodes are recomputed
// from their children, so repeated updates never drift. Sampling is inversion of the
// cumulative sum over item order.
class WeightTree {
 public:
  WeightTree() = default;
  explicit WeightTree(std::span<const double> weights);

  std::size_t size() const { return size_; }
  double total() const { return size_ == 0 ? 0.0 : tree_[1]; }
  double weight(std::size_t i) const { return tree_[leaves_ + i]; }
  void set(std::size_t i, double w);

  // Requires total() > 0. Never returns a zero-weight item.
  std::size_t sample(Rng& rng) const;
  std::size_t find(double target) const;

 private:
  std::size_t size_ = 0;
  std::size_t leaves_ = 1;
  std::vector<double> tree_;
};

}  // namespace rpkitor
