#include "rpkitor/random.hpp"

#include <stdexcept>

namespace rpkitor {

WeightTree::WeightTree(std::span<const double> weights) : size_(weights.size()) {
  while (leaves_ < size_) leaves_ <<= 1;
  tree_.assign(2 * leaves_, 0.0);
  for (std::size_t i = 0; i < size_; ++i) {
    if (!(weights[i] >= 0.0)) throw std::invalid_argument("weights must be nonnegative");
    tree_[leaves_ + i] = weights[i];
  }
  for (std::size_t n = leaves_ - 1; n >= 1; --n) tree_[n] = tree_[2 * n] + tree_[2 * n + 1];
}

void WeightTree::set(std::size_t i, double w) {
  if (!(w >= 0.0)) throw std::invalid_argument("weights must be nonnegative");
  std::size_t n = leaves_ + i;
  tree_[n] = w;
  for (n >>= 1; n >= 1; n >>= 1) tree_[n] = tree_[2 * n] + tree_[2 * n + 1];
}

std::size_t WeightTree::find(double target) const {
  std::size_t n = 1;
  while (n < leaves_) {
    const double left = tree_[2 * n];
    const double right = tree_[2 * n + 1];
    // Rounding can push target past the left sum by an ulp; never descend into an empty side.
    if ((target < left && left > 0.0) || right <= 0.0) {
      n = 2 * n;
    } else {
      target -= left;
      n = 2 * n + 1;
    }
  }
  return n - leaves_;
}

std::size_t WeightTree::sample(Rng& rng) const {
  if (!(total() > 0.0)) throw std::logic_error("sampling from an all-zero weight tree");
  return find(uniform01(rng) * total());
}

}  // namespace rpkitor
