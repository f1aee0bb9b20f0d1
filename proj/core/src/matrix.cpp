#include "pcomq/matrix.hpp"

#include <cmath>

namespace pcomq {

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_) {
    throw ShapeError("matrix data length " + std::to_string(data_.size()) + " does not match " +
                     std::to_string(rows_) + "x" + std::to_string(cols_));
  }
}

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const std::size_t m = rows.size();
  const std::size_t n = m == 0 ? 0 : rows.begin()->size();
  std::vector<double> data;
  data.reserve(m * n);
  for (const auto& r : rows) {
    if (r.size() != n) throw ShapeError("ragged row in Matrix::from_rows");
    data.insert(data.end(), r.begin(), r.end());
  }
  return Matrix(m, n, std::move(data));
}

Matrix Matrix::identity(std::size_t n) {
  Matrix out(n, n);
  for (std::size_t i = 0; i < n; ++i) out(i, i) = 1.0;
  return out;
}

std::vector<double> Matrix::column(std::size_t j) const {
  if (j >= cols_) throw std::out_of_range("column index out of range");
  std::vector<double> out(rows_);
  for (std::size_t i = 0; i < rows_; ++i) out[i] = (*this)(i, j);
  return out;
}

bool Matrix::all_finite() const noexcept {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

Matrix transpose(const Matrix& a) {
  Matrix out(a.cols(), a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t j = 0; j < a.cols(); ++j) out(j, i) = a(i, j);
  }
  return out;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul: " + std::to_string(a.rows()) + "x" + std::to_string(a.cols()) +
                     " times " + std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
  }
  Matrix out(a.rows(), b.cols());
  // i-k-j order keeps the inner loop contiguous in both b and out.
  for (std::size_t i = 0; i < a.rows(); ++i) {
    auto out_row = out.row(i);
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      const auto b_row = b.row(k);
      for (std::size_t j = 0; j < b.cols(); ++j) out_row[j] += aik * b_row[j];
    }
  }
  return out;
}

Matrix subtract(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) throw ShapeError("subtract: shape mismatch");
  Matrix out = a;
  auto od = out.data();
  auto bd = b.data();
  for (std::size_t k = 0; k < od.size(); ++k) od[k] -= bd[k];
  return out;
}

double frob_norm_sq(const Matrix& a) noexcept {
  double acc = 0.0;
  for (double v : a.data()) acc += v * v;
  return acc;
}

double col_dot(const Matrix& a, std::size_t j, std::span<const double> v) {
  if (j >= a.cols()) throw std::out_of_range("col_dot: column index out of range");
  if (v.size() != a.rows()) throw ShapeError("col_dot: vector length does not match rows");
  double acc = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) acc += a(i, j) * v[i];
  return acc;
}

double dot(std::span<const double> a, std::span<const double> b) noexcept {
  double acc = 0.0;
  const std::size_t n = a.size() < b.size() ? a.size() : b.size();
  for (std::size_t k = 0; k < n; ++k) acc += a[k] * b[k];
  return acc;
}

void add_outer(Matrix& a, double alpha, std::span<const double> x, std::span<const double> y) {
  if (x.size() != a.rows() || y.size() != a.cols()) throw ShapeError("add_outer: shape mismatch");
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double s = alpha * x[i];
    auto r = a.row(i);
    for (std::size_t j = 0; j < a.cols(); ++j) r[j] += s * y[j];
  }
}

void require_finite(const Matrix& a, const std::string& what) {
  if (!a.all_finite()) throw ShapeError(what + " contains non-finite values");
}

}  // namespace pcomq
