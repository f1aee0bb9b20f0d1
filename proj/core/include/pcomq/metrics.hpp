#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pcomq/calibration.hpp"
#include "pcomq/config.hpp"
#include "pcomq/matrix.hpp"

namespace pcomq {

struct ErrorBin {
  double lo = 0.0;
  double hi = 0.0;
  std::size_t count = 0;
  // Empty bins have no mean.
  std::optional<double> mean_rel_err;
};

struct ErrorReport {
  std::vector<ErrorBin> bins;
  double proxy_loss = 0.0;
  double max_abs_error = 0.0;
  std::string method;
  int bits = 0;
  std::string granularity;
};

// |W_q - W| / (|W| + eps), elementwise.
Matrix relative_error_map(const Matrix& w, const Matrix& w_q, double eps = 1e-8);

// Mean relative error grouped by |W| into the bins of `edges` (same clamping
// rule as magnitude_histogram, so counts sum to W.size()).
std::vector<ErrorBin> binned_relative_error(const Matrix& w, const Matrix& w_q,
                                            std::span<const double> edges, double eps = 1e-8);

// `count` log-spaced bins from `lo` (> 0) to `hi`; hi <= lo is widened to
// 10 * lo.
std::vector<double> log_bin_edges(double lo, double hi, std::size_t count);

// Mean relative error over the entries whose |W| rank falls in the quantile
// window [q_lo, q_hi) (ranked ascending, ties by flat index).
double quantile_relative_error(const Matrix& w, const Matrix& w_q, double q_lo, double q_hi,
                               double eps = 1e-8);

double max_abs_error(const Matrix& w, const Matrix& w_q);

// Proxy loss, max error and `bins` log bins from 1e-4 to max|W|.
ErrorReport summarize(const Matrix& w, const Matrix& w_q, const Matrix& x, const QuantConfig& cfg,
                      std::size_t bins = 16);

}  // namespace pcomq
