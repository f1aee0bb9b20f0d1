#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pcomq/matrix.hpp"

namespace pcomq {

// Calibration matrix X (samples x features) together with an optional
// per-output-column reindexing of its features. Output column j of a weight
// matrix sees X^(j), whose p-th column is X's column source_feature(j, p).
// Without orderings every output column sees X unchanged.
class CalibrationView {
 public:
  CalibrationView() = default;
  explicit CalibrationView(Matrix x);
  // column_orders[j][p] = feature of X used at position p for output column j.
  // Throws ShapeError unless every ordering is a bijection on the features.
  CalibrationView(Matrix x, std::vector<std::vector<std::size_t>> column_orders);

  const Matrix& matrix() const noexcept { return x_; }
  std::size_t samples() const noexcept { return x_.rows(); }
  std::size_t features() const noexcept { return x_.cols(); }
  bool per_column() const noexcept { return !orders_.empty(); }
  std::size_t ordered_columns() const noexcept { return orders_.size(); }

  std::size_t source_feature(std::size_t j, std::size_t p) const noexcept {
    return orders_.empty() ? p : orders_[j][p];
  }

  // X^(j) * w for one weight column w.
  std::vector<double> apply_column(std::span<const double> w, std::size_t j) const;
  // Matrix whose column j is X^(j) * (column j of w).
  Matrix apply(const Matrix& w) const;

 private:
  Matrix x_;
  std::vector<std::vector<std::size_t>> orders_;
};

}  // namespace pcomq
