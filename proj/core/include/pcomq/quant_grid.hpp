#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "pcomq/matrix.hpp"

namespace pcomq {

// Uniform affine grid for one quantization unit. Codes are absolute integers
// (zero point folded in), so the dequantized value is delta * code.
struct QuantParams {
  double delta = 0.0;
  std::int64_t zero_point = 0;
  int bits = 4;
  // Exact value of a constant unit; only meaningful when delta == 0.
  double constant = 0.0;

  bool degenerate() const noexcept { return delta == 0.0; }
  std::int64_t code_min() const noexcept { return zero_point; }
  std::int64_t code_max() const noexcept { return zero_point + ((std::int64_t{1} << bits) - 1); }

  friend bool operator==(const QuantParams&, const QuantParams&) = default;
};

// Round half away from zero.
double round_half_away(double v) noexcept;

// delta = lambda * (max - min) / (2^bits - 1), zero_point = round(min / delta).
// Throws std::invalid_argument on an empty vector, bits outside [1, 16] or
// lambda outside (0, 1].
QuantParams compute_params(std::span<const double> w, int bits, double lambda = 1.0);

std::int64_t rtn_code(double w, const QuantParams& p) noexcept;
std::vector<std::int64_t> rtn_quantize(std::span<const double> w, const QuantParams& p);

double dequantize_code(std::int64_t code, const QuantParams& p) noexcept;
// Throws std::out_of_range if any code is outside [z, z + 2^b - 1].
std::vector<double> dequantize(std::span<const std::int64_t> codes, const QuantParams& p);

enum class GranularityKind { PerLayer, PerChannel, BlockWise };

struct Granularity {
  GranularityKind kind = GranularityKind::PerChannel;
  std::size_t block_size = 64;

  static Granularity per_layer() { return {GranularityKind::PerLayer, 64}; }
  static Granularity per_channel() { return {GranularityKind::PerChannel, 64}; }
  static Granularity block_wise(std::size_t block) { return {GranularityKind::BlockWise, block}; }

  friend bool operator==(const Granularity&, const Granularity&) = default;
};

std::string_view to_string(GranularityKind kind) noexcept;

// Rectangle of entries sharing one QuantParams: rows [row_begin, row_end) of
// columns [col_begin, col_end).
struct UnitDescriptor {
  std::size_t row_begin = 0;
  std::size_t row_end = 0;
  std::size_t col_begin = 0;
  std::size_t col_end = 0;

  std::size_t element_count() const noexcept {
    return (row_end - row_begin) * (col_end - col_begin);
  }
  friend bool operator==(const UnitDescriptor&, const UnitDescriptor&) = default;
};

// Partition of an m x n matrix into quantization units. Units are ordered
// column-major: all blocks of column 0, then column 1, and so on.
class UnitLayout {
 public:
  UnitLayout() = default;
  // Throws std::invalid_argument for BlockWise with block_size < 1.
  UnitLayout(std::size_t rows, std::size_t cols, Granularity g);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  const Granularity& granularity() const noexcept { return granularity_; }
  std::size_t unit_count() const noexcept { return units_.size(); }
  const std::vector<UnitDescriptor>& units() const noexcept { return units_; }
  const UnitDescriptor& unit(std::size_t u) const { return units_.at(u); }

  // Index of the unit owning entry (i, j).
  std::size_t unit_of(std::size_t i, std::size_t j) const noexcept;
  std::size_t blocks_per_column() const noexcept { return blocks_per_col_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  Granularity granularity_{};
  std::size_t blocks_per_col_ = 1;
  std::vector<UnitDescriptor> units_;
};

std::vector<UnitDescriptor> partition_units(const Matrix& w, Granularity g);

// Values of unit u gathered in row-major order of the rectangle.
std::vector<double> gather_unit(const Matrix& w, const UnitDescriptor& unit);

// Integer codes with the shape of the weight matrix.
class CodeMatrix {
 public:
  CodeMatrix() = default;
  CodeMatrix(std::size_t rows, std::size_t cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::int64_t& operator()(std::size_t i, std::size_t j) noexcept { return data_[i * cols_ + j]; }
  std::int64_t operator()(std::size_t i, std::size_t j) const noexcept {
    return data_[i * cols_ + j];
  }
  std::span<const std::int64_t> data() const noexcept { return data_; }

  friend bool operator==(const CodeMatrix&, const CodeMatrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<std::int64_t> data_;
};

// Per-unit parameters computed on w with the given layout.
std::vector<QuantParams> compute_unit_params(const Matrix& w, const UnitLayout& layout, int bits,
                                             double lambda);

CodeMatrix rtn_quantize_matrix(const Matrix& w, const UnitLayout& layout,
                               std::span<const QuantParams> params);

// Throws std::out_of_range if any code is outside its unit's range.
Matrix dequantize_matrix(const CodeMatrix& codes, const UnitLayout& layout,
                         std::span<const QuantParams> params);

}  // namespace pcomq
