#include "pcomq/calibration.hpp"

#include <algorithm>
#include <string>

namespace pcomq {

CalibrationView::CalibrationView(Matrix x) : x_(std::move(x)) {}

CalibrationView::CalibrationView(Matrix x, std::vector<std::vector<std::size_t>> column_orders)
    : x_(std::move(x)), orders_(std::move(column_orders)) {
  std::vector<char> seen(x_.cols());
  for (const auto& order : orders_) {
    if (order.size() != x_.cols()) {
      throw ShapeError("calibration ordering has " + std::to_string(order.size()) +
                       " entries, expected " + std::to_string(x_.cols()));
    }
    std::fill(seen.begin(), seen.end(), 0);
    for (std::size_t f : order) {
      if (f >= seen.size() || seen[f]) throw ShapeError("calibration ordering is not a bijection");
      seen[f] = 1;
    }
  }
}

std::vector<double> CalibrationView::apply_column(std::span<const double> w,
                                                  std::size_t j) const {
  if (w.size() != x_.cols()) throw ShapeError("apply_column: weight length mismatch");
  if (per_column() && j >= orders_.size()) throw ShapeError("apply_column: column out of range");
  std::vector<double> out(x_.rows(), 0.0);
  for (std::size_t p = 0; p < w.size(); ++p) {
    const std::size_t f = source_feature(j, p);
    const double wp = w[p];
    for (std::size_t t = 0; t < x_.rows(); ++t) out[t] += x_(t, f) * wp;
  }
  return out;
}

Matrix CalibrationView::apply(const Matrix& w) const {
  if (w.rows() != x_.cols()) throw ShapeError("CalibrationView::apply: shape mismatch");
  if (!per_column()) return matmul(x_, w);
  if (orders_.size() != w.cols()) throw ShapeError("CalibrationView::apply: column count mismatch");
  Matrix out(x_.rows(), w.cols());
  for (std::size_t j = 0; j < w.cols(); ++j) {
    const auto col = apply_column(w.column(j), j);
    for (std::size_t t = 0; t < col.size(); ++t) out(t, j) = col[t];
  }
  return out;
}

}  // namespace pcomq
