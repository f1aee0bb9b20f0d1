#include "pcomq/permute.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace pcomq {
namespace {

std::vector<std::size_t> invert(const std::vector<std::size_t>& forward) {
  std::vector<std::size_t> inverse(forward.size());
  for (std::size_t p = 0; p < forward.size(); ++p) inverse[forward[p]] = p;
  return inverse;
}

std::vector<std::size_t> stable_order(const std::vector<double>& keys) {
  std::vector<std::size_t> order(keys.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return keys[a] < keys[b]; });
  return order;
}

double row_key(std::span<const double> row, RowKey key) {
  double acc = 0.0;
  for (double v : row) acc = key == RowKey::MaxAbs ? std::max(acc, std::abs(v)) : acc + std::abs(v);
  return key == RowKey::MaxAbs ? acc : acc / static_cast<double>(row.size());
}

void check_plan_shape(const Matrix& w, const PermutationPlan& plan) {
  if (w.rows() != plan.rows || w.cols() != plan.cols) {
    throw ShapeError("permutation plan built for " + std::to_string(plan.rows) + "x" +
                     std::to_string(plan.cols) + ", matrix is " + std::to_string(w.rows()) + "x" +
                     std::to_string(w.cols()));
  }
}

}  // namespace

PermutationPlan build_plan(const Matrix& w, PermutationStrategy strategy, RowKey key) {
  if (w.empty()) throw ShapeError("build_plan: empty matrix");
  PermutationPlan plan;
  plan.strategy = strategy;
  plan.rows = w.rows();
  plan.cols = w.cols();
  switch (strategy) {
    case PermutationStrategy::None:
      throw std::invalid_argument("build_plan: strategy none has no plan");
    case PermutationStrategy::JointRow: {
      std::vector<double> keys(w.rows());
      for (std::size_t i = 0; i < w.rows(); ++i) keys[i] = row_key(w.row(i), key);
      plan.forward.push_back(stable_order(keys));
      break;
    }
    case PermutationStrategy::PerColumn:
      plan.forward.reserve(w.cols());
      for (std::size_t j = 0; j < w.cols(); ++j) plan.forward.push_back(stable_order(w.column(j)));
      break;
  }
  plan.inverse.reserve(plan.forward.size());
  for (const auto& f : plan.forward) plan.inverse.push_back(invert(f));
  return plan;
}

PermutationPlan identity_plan(std::size_t rows, std::size_t cols, PermutationStrategy strategy) {
  if (strategy == PermutationStrategy::None) {
    throw std::invalid_argument("identity_plan: strategy none has no plan");
  }
  PermutationPlan plan;
  plan.strategy = strategy;
  plan.rows = rows;
  plan.cols = cols;
  std::vector<std::size_t> id(rows);
  std::iota(id.begin(), id.end(), std::size_t{0});
  const std::size_t count = strategy == PermutationStrategy::PerColumn ? cols : 1;
  plan.forward.assign(count, id);
  plan.inverse.assign(count, id);
  return plan;
}

Matrix apply_plan(const Matrix& w, const PermutationPlan& plan) {
  check_plan_shape(w, plan);
  Matrix out(w.rows(), w.cols());
  for (std::size_t j = 0; j < w.cols(); ++j) {
    const auto& forward = plan.forward_for(j);
    for (std::size_t p = 0; p < w.rows(); ++p) out(p, j) = w(forward[p], j);
  }
  return out;
}

Matrix restore(const Matrix& w_permuted, const PermutationPlan& plan) {
  check_plan_shape(w_permuted, plan);
  Matrix out(w_permuted.rows(), w_permuted.cols());
  for (std::size_t j = 0; j < w_permuted.cols(); ++j) {
    const auto& inverse = plan.inverse_for(j);
    for (std::size_t r = 0; r < w_permuted.rows(); ++r) out(r, j) = w_permuted(inverse[r], j);
  }
  return out;
}

CalibrationView align_calibration(const Matrix& x, const PermutationPlan& plan) {
  if (x.cols() != plan.rows) {
    throw ShapeError("align_calibration: calibration has " + std::to_string(x.cols()) +
                     " features, plan has " + std::to_string(plan.rows) + " rows");
  }
  if (plan.strategy == PermutationStrategy::PerColumn) return CalibrationView(x, plan.forward);
  const auto& forward = plan.forward.front();
  Matrix x_p(x.rows(), x.cols());
  for (std::size_t t = 0; t < x.rows(); ++t) {
    for (std::size_t p = 0; p < x.cols(); ++p) x_p(t, p) = x(t, forward[p]);
  }
  return CalibrationView(std::move(x_p));
}

QuantResult permutation_comq(const Matrix& w, const Matrix& x, const QuantConfig& cfg) {
  QuantConfig inner = cfg;
  inner.method = Method::PermutationCOMQ;
  inner.validate();
  PermutationPlan plan = build_plan(w, cfg.permutation, cfg.row_key);
  const Matrix w_p = apply_plan(w, plan);
  QuantResult r = comq_quantize(w_p, align_calibration(x, plan), inner);
  r.method = Method::PermutationCOMQ;
  r.w_q = restore(r.w_q, plan);
  r.plan = std::move(plan);
  return r;
}

QuantResult quantize(const Matrix& w, const Matrix& x, const QuantConfig& cfg) {
  switch (cfg.method) {
    case Method::RTN:
      return rtn_quantize_layer(w, cfg);
    case Method::COMQ:
      return comq_quantize(w, x, cfg);
    case Method::PermutationCOMQ:
      return permutation_comq(w, x, cfg);
  }
  throw std::invalid_argument("quantize: unknown method");
}

}  // namespace pcomq
