#pragma once

#include <cstddef>
#include <vector>

#include "pcomq/config.hpp"

namespace pcomq {

// Row reordering applied before quantization and undone afterwards.
// forward[c][p] is the original row placed at position p; inverse[c][r] is the
// position of original row r. JointRow plans hold one ordering shared by all
// columns, PerColumn plans hold one ordering per column.
struct PermutationPlan {
  PermutationStrategy strategy = PermutationStrategy::JointRow;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::vector<std::size_t>> forward;
  std::vector<std::vector<std::size_t>> inverse;

  const std::vector<std::size_t>& forward_for(std::size_t j) const {
    return strategy == PermutationStrategy::PerColumn ? forward[j] : forward.front();
  }
  const std::vector<std::size_t>& inverse_for(std::size_t j) const {
    return strategy == PermutationStrategy::PerColumn ? inverse[j] : inverse.front();
  }

  friend bool operator==(const PermutationPlan&, const PermutationPlan&) = default;
};

}  // namespace pcomq
