#pragma once

// Test-only reference computations. Everything here recomputes objectives
// from scratch with plain loops and never calls into the solver.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <span>
#include <vector>

#include "pcomq/calibration.hpp"
#include "pcomq/matrix.hpp"
#include "pcomq/quant_grid.hpp"
#include "pcomq/simgen.hpp"

namespace pcomq::testing {

// Population skewness m3 / m2^1.5.
inline double sample_skewness(std::span<const double> v) {
  const double n = static_cast<double>(v.size());
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= n;
  double m2 = 0.0, m3 = 0.0;
  for (double x : v) {
    const double d = x - mean;
    m2 += d * d;
    m3 += d * d * d;
  }
  return (m3 / n) / std::pow(m2 / n, 1.5);
}

inline Matrix random_matrix(std::size_t rows, std::size_t cols, std::uint64_t seed,
                            double scale = 1.0) {
  RandomStream rng(seed, "test/matrix");
  Matrix m(rows, cols);
  for (double& v : m.data()) v = scale * rng.normal();
  return m;
}

// ||X^(j) (w_j - wq_j)||^2 for a single column, from scratch.
inline double column_objective(const CalibrationView& x, const Matrix& w, const Matrix& w_q,
                               std::size_t j) {
  double total = 0.0;
  for (std::size_t t = 0; t < x.samples(); ++t) {
    double acc = 0.0;
    for (std::size_t p = 0; p < w.rows(); ++p) {
      acc += x.matrix()(t, x.source_feature(j, p)) * (w(p, j) - w_q(p, j));
    }
    total += acc * acc;
  }
  return total;
}

struct CoordinateViolation {
  std::size_t i = 0;
  std::size_t j = 0;
  std::int64_t chosen = 0;
  std::int64_t better = 0;
  double chosen_loss = 0.0;
  double better_loss = 0.0;
};

// Exhaustive check of coordinate (i, j): tries every in-range code with all
// other entries of w_q fixed. Returns the best strictly-better code, if any.
inline std::optional<CoordinateViolation> check_coordinate(const CalibrationView& x,
                                                           const Matrix& w, const Matrix& w_q,
                                                           const CodeMatrix& codes,
                                                           const QuantParams& p, std::size_t i,
                                                           std::size_t j, double rel_tol = 1e-12) {
  if (p.degenerate()) return std::nullopt;
  Matrix trial = w_q;
  trial(i, j) = p.delta * static_cast<double>(codes(i, j));
  const double chosen_loss = column_objective(x, w, trial, j);
  std::optional<CoordinateViolation> worst;
  for (std::int64_t c = p.code_min(); c <= p.code_max(); ++c) {
    trial(i, j) = p.delta * static_cast<double>(c);
    const double loss = column_objective(x, w, trial, j);
    if (loss < chosen_loss - rel_tol * std::max(1.0, chosen_loss)) {
      if (!worst || loss < worst->better_loss) {
        worst = CoordinateViolation{i, j, codes(i, j), c, chosen_loss, loss};
      }
    }
  }
  return worst;
}

// Minimum of ||X (w - delta q)||^2 over every code vector q of a single
// column (all codes in [z, z + 2^b - 1]). Feasible only for tiny m.
inline double global_min_column(const Matrix& x, std::span<const double> w, const QuantParams& p) {
  const std::size_t m = w.size();
  const std::int64_t levels = p.code_max() - p.code_min() + 1;
  std::vector<std::int64_t> q(m, p.code_min());
  double best = std::numeric_limits<double>::infinity();
  while (true) {
    double total = 0.0;
    for (std::size_t t = 0; t < x.rows(); ++t) {
      double acc = 0.0;
      for (std::size_t k = 0; k < m; ++k) acc += x(t, k) * (w[k] - p.delta * static_cast<double>(q[k]));
      total += acc * acc;
    }
    best = std::min(best, total);
    std::size_t k = 0;
    while (k < m && ++q[k] > p.code_min() + levels - 1) {
      q[k] = p.code_min();
      ++k;
    }
    if (k == m) break;
  }
  return best;
}

// A matrix whose every unit of `layout` lies exactly on its own lambda = 1
// grid: codes span the full [z, z + 2^b - 1] in each unit and the step is a
// power of two, so delta and zero point are recovered bit-exactly.
inline Matrix on_grid_matrix(const UnitLayout& layout, int bits, std::uint64_t seed) {
  RandomStream rng(seed, "test/on-grid");
  Matrix w(layout.rows(), layout.cols());
  const std::int64_t top = (std::int64_t{1} << bits) - 1;
  for (const auto& unit : layout.units()) {
    const double delta = std::ldexp(1.0, -static_cast<int>(2 + rng.below(4)));
    const auto z = static_cast<std::int64_t>(rng.below(9)) - 4;
    std::vector<double*> cells;
    for (std::size_t i = unit.row_begin; i < unit.row_end; ++i) {
      for (std::size_t j = unit.col_begin; j < unit.col_end; ++j) cells.push_back(&w(i, j));
    }
    for (double* c : cells) {
      *c = delta * static_cast<double>(z + static_cast<std::int64_t>(rng.below(top + 1)));
    }
    if (cells.size() >= 2) {
      const std::size_t a = rng.below(cells.size());
      std::size_t b = rng.below(cells.size() - 1);
      if (b >= a) ++b;
      *cells[a] = delta * static_cast<double>(z);
      *cells[b] = delta * static_cast<double>(z + top);
    }
  }
  return w;
}

}  // namespace pcomq::testing
