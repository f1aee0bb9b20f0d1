#include "pcomq/quant_grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace pcomq {

double round_half_away(double v) noexcept { return std::round(v); }

QuantParams compute_params(std::span<const double> w, int bits, double lambda) {
  if (w.empty()) throw std::invalid_argument("compute_params: empty vector");
  if (bits < 1 || bits > 16) {
    throw std::invalid_argument("compute_params: bits must be in [1, 16], got " +
                                std::to_string(bits));
  }
  if (!(lambda > 0.0 && lambda <= 1.0)) {
    throw std::invalid_argument("compute_params: lambda must be in (0, 1]");
  }
  const auto [lo, hi] = std::minmax_element(w.begin(), w.end());
  QuantParams p;
  p.bits = bits;
  const double range = *hi - *lo;
  if (range == 0.0) {
    p.constant = *lo;
    return p;
  }
  const double levels = static_cast<double>((std::int64_t{1} << bits) - 1);
  p.delta = lambda * range / levels;
  p.zero_point = static_cast<std::int64_t>(round_half_away(*lo / p.delta));
  return p;
}

std::int64_t rtn_code(double w, const QuantParams& p) noexcept {
  if (p.degenerate()) return 0;
  const double top = static_cast<double>((std::int64_t{1} << p.bits) - 1);
  const double shifted = round_half_away(w / p.delta) - static_cast<double>(p.zero_point);
  return static_cast<std::int64_t>(std::clamp(shifted, 0.0, top)) + p.zero_point;
}

std::vector<std::int64_t> rtn_quantize(std::span<const double> w, const QuantParams& p) {
  std::vector<std::int64_t> codes(w.size());
  std::transform(w.begin(), w.end(), codes.begin(), [&](double v) { return rtn_code(v, p); });
  return codes;
}

double dequantize_code(std::int64_t code, const QuantParams& p) noexcept {
  return p.degenerate() ? p.constant : p.delta * static_cast<double>(code);
}

std::vector<double> dequantize(std::span<const std::int64_t> codes, const QuantParams& p) {
  std::vector<double> out(codes.size());
  for (std::size_t k = 0; k < codes.size(); ++k) {
    if (codes[k] < p.code_min() || codes[k] > p.code_max()) {
      throw std::out_of_range("dequantize: code " + std::to_string(codes[k]) +
                              " outside [" + std::to_string(p.code_min()) + ", " +
                              std::to_string(p.code_max()) + "]");
    }
    out[k] = dequantize_code(codes[k], p);
  }
  return out;
}

std::string_view to_string(GranularityKind kind) noexcept {
  switch (kind) {
    case GranularityKind::PerLayer:
      return "layer";
    case GranularityKind::PerChannel:
      return "channel";
    case GranularityKind::BlockWise:
      return "block";
  }
  return "unknown";
}

UnitLayout::UnitLayout(std::size_t rows, std::size_t cols, Granularity g)
    : rows_(rows), cols_(cols), granularity_(g) {
  switch (g.kind) {
    case GranularityKind::PerLayer:
      blocks_per_col_ = 1;
      units_.push_back({0, rows, 0, cols});
      break;
    case GranularityKind::PerChannel:
      blocks_per_col_ = 1;
      units_.reserve(cols);
      for (std::size_t j = 0; j < cols; ++j) units_.push_back({0, rows, j, j + 1});
      break;
    case GranularityKind::BlockWise:
      if (g.block_size < 1) throw std::invalid_argument("block_size must be at least 1");
      blocks_per_col_ = (rows + g.block_size - 1) / g.block_size;
      units_.reserve(cols * blocks_per_col_);
      for (std::size_t j = 0; j < cols; ++j) {
        for (std::size_t b = 0; b < blocks_per_col_; ++b) {
          const std::size_t begin = b * g.block_size;
          units_.push_back({begin, std::min(rows, begin + g.block_size), j, j + 1});
        }
      }
      break;
  }
}

std::size_t UnitLayout::unit_of(std::size_t i, std::size_t j) const noexcept {
  switch (granularity_.kind) {
    case GranularityKind::PerLayer:
      return 0;
    case GranularityKind::PerChannel:
      return j;
    case GranularityKind::BlockWise:
      return j * blocks_per_col_ + i / granularity_.block_size;
  }
  return 0;
}

std::vector<UnitDescriptor> partition_units(const Matrix& w, Granularity g) {
  return UnitLayout(w.rows(), w.cols(), g).units();
}

std::vector<double> gather_unit(const Matrix& w, const UnitDescriptor& unit) {
  std::vector<double> out;
  out.reserve(unit.element_count());
  for (std::size_t i = unit.row_begin; i < unit.row_end; ++i) {
    for (std::size_t j = unit.col_begin; j < unit.col_end; ++j) out.push_back(w(i, j));
  }
  return out;
}

std::vector<QuantParams> compute_unit_params(const Matrix& w, const UnitLayout& layout, int bits,
                                             double lambda) {
  std::vector<QuantParams> params;
  params.reserve(layout.unit_count());
  for (const auto& unit : layout.units()) {
    params.push_back(compute_params(gather_unit(w, unit), bits, lambda));
  }
  return params;
}

CodeMatrix rtn_quantize_matrix(const Matrix& w, const UnitLayout& layout,
                               std::span<const QuantParams> params) {
  if (w.rows() != layout.rows() || w.cols() != layout.cols() ||
      params.size() != layout.unit_count()) {
    throw ShapeError("rtn_quantize_matrix: layout does not match weights");
  }
  CodeMatrix codes(w.rows(), w.cols());
  for (std::size_t i = 0; i < w.rows(); ++i) {
    for (std::size_t j = 0; j < w.cols(); ++j) {
      codes(i, j) = rtn_code(w(i, j), params[layout.unit_of(i, j)]);
    }
  }
  return codes;
}

Matrix dequantize_matrix(const CodeMatrix& codes, const UnitLayout& layout,
                         std::span<const QuantParams> params) {
  if (codes.rows() != layout.rows() || codes.cols() != layout.cols() ||
      params.size() != layout.unit_count()) {
    throw ShapeError("dequantize_matrix: layout does not match codes");
  }
  Matrix out(codes.rows(), codes.cols());
  for (std::size_t i = 0; i < codes.rows(); ++i) {
    for (std::size_t j = 0; j < codes.cols(); ++j) {
      const QuantParams& p = params[layout.unit_of(i, j)];
      const std::int64_t c = codes(i, j);
      if (c < p.code_min() || c > p.code_max()) {
        throw std::out_of_range("dequantize_matrix: code out of range at (" + std::to_string(i) +
                                ", " + std::to_string(j) + ")");
      }
      out(i, j) = dequantize_code(c, p);
    }
  }
  return out;
}

}  // namespace pcomq
