// Connected components of a sparsity pattern, used to split block-diagonal
// (up to permutation) problems into independent pieces.

#pragma once

#include <cstddef>
#include <numeric>
#include <vector>

namespace cbh::detail {

class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }

  void unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a != b) parent_[a < b ? b : a] = a < b ? a : b;
  }

  /// Members of each component, each list ascending; components ordered by
  /// their smallest member.
  std::vector<std::vector<std::size_t>> groups() {
    std::vector<std::size_t> slot(parent_.size(), static_cast<std::size_t>(-1));
    std::vector<std::vector<std::size_t>> out;
    for (std::size_t i = 0; i < parent_.size(); ++i) {
      const std::size_t r = find(i);
      if (slot[r] == static_cast<std::size_t>(-1)) {
        slot[r] = out.size();
        out.emplace_back();
      }
      out[slot[r]].push_back(i);
    }
    return out;
  }

 private:
  std::vector<std::size_t> parent_;
};

}  // namespace cbh::detail
