#include "pcomq/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "pcomq/comq.hpp"
#include "pcomq/simgen.hpp"

namespace pcomq {
namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* what) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError(std::string(what) + ": W and W_q differ in shape");
  }
}

}  // namespace

Matrix relative_error_map(const Matrix& w, const Matrix& w_q, double eps) {
  require_same_shape(w, w_q, "relative_error_map");
  if (!(eps > 0.0)) throw std::invalid_argument("relative_error_map: eps must be positive");
  Matrix out(w.rows(), w.cols());
  auto o = out.data();
  auto a = w.data();
  auto b = w_q.data();
  for (std::size_t k = 0; k < o.size(); ++k) o[k] = std::abs(b[k] - a[k]) / (std::abs(a[k]) + eps);
  return out;
}

std::vector<ErrorBin> binned_relative_error(const Matrix& w, const Matrix& w_q,
                                            std::span<const double> edges, double eps) {
  require_ascending_edges(edges);
  const Matrix rel = relative_error_map(w, w_q, eps);
  const std::size_t bins = edges.size() - 1;
  std::vector<double> sums(bins, 0.0);
  std::vector<std::size_t> counts(bins, 0);
  auto a = w.data();
  auto r = rel.data();
  for (std::size_t k = 0; k < a.size(); ++k) {
    const std::size_t b = bin_index(std::abs(a[k]), edges);
    sums[b] += r[k];
    ++counts[b];
  }
  std::vector<ErrorBin> out(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    out[b].lo = edges[b];
    out[b].hi = edges[b + 1];
    out[b].count = counts[b];
    if (counts[b] > 0) out[b].mean_rel_err = sums[b] / static_cast<double>(counts[b]);
  }
  return out;
}

std::vector<double> log_bin_edges(double lo, double hi, std::size_t count) {
  if (count < 1) throw std::invalid_argument("log_bin_edges: need at least one bin");
  if (!(lo > 0.0)) throw std::invalid_argument("log_bin_edges: lower edge must be positive");
  if (!(hi > lo)) hi = lo * 10.0;
  std::vector<double> edges(count + 1);
  const double log_lo = std::log(lo);
  const double step = (std::log(hi) - log_lo) / static_cast<double>(count);
  for (std::size_t k = 0; k <= count; ++k) {
    edges[k] = std::exp(log_lo + step * static_cast<double>(k));
  }
  edges.front() = lo;
  edges.back() = hi;
  return edges;
}

double quantile_relative_error(const Matrix& w, const Matrix& w_q, double q_lo, double q_hi,
                               double eps) {
  require_same_shape(w, w_q, "quantile_relative_error");
  if (!(0.0 <= q_lo && q_lo < q_hi && q_hi <= 1.0)) {
    throw std::invalid_argument("quantile window must satisfy 0 <= lo < hi <= 1");
  }
  const Matrix rel = relative_error_map(w, w_q, eps);
  auto a = w.data();
  std::vector<std::size_t> order(a.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return std::abs(a[x]) < std::abs(a[y]); });
  const auto total = static_cast<double>(a.size());
  const auto begin = static_cast<std::size_t>(std::floor(q_lo * total));
  const auto end = std::max(begin + 1, static_cast<std::size_t>(std::floor(q_hi * total)));
  double sum = 0.0;
  for (std::size_t k = begin; k < end; ++k) sum += rel.data()[order[k]];
  return sum / static_cast<double>(end - begin);
}

double max_abs_error(const Matrix& w, const Matrix& w_q) {
  require_same_shape(w, w_q, "max_abs_error");
  double worst = 0.0;
  auto a = w.data();
  auto b = w_q.data();
  for (std::size_t k = 0; k < a.size(); ++k) worst = std::max(worst, std::abs(b[k] - a[k]));
  return worst;
}

ErrorReport summarize(const Matrix& w, const Matrix& w_q, const Matrix& x, const QuantConfig& cfg,
                      std::size_t bins) {
  ErrorReport report;
  report.proxy_loss = proxy_loss(w, w_q, x);
  report.max_abs_error = max_abs_error(w, w_q);
  double max_mag = 0.0;
  for (double v : w.data()) max_mag = std::max(max_mag, std::abs(v));
  report.bins = binned_relative_error(w, w_q, log_bin_edges(1e-4, max_mag, bins), cfg.epsilon_rel);
  report.method = std::string(to_string(cfg.method));
  report.bits = cfg.bits;
  report.granularity = std::string(to_string(cfg.granularity.kind));
  return report;
}

}  // namespace pcomq
