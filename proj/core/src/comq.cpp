#include "pcomq/comq.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "pcomq/parallel.hpp"

namespace pcomq {

double proxy_loss(const Matrix& w, const Matrix& w_q, const Matrix& x) {
  if (w.rows() != w_q.rows() || w.cols() != w_q.cols()) {
    throw ShapeError("proxy_loss: W and W_q differ in shape");
  }
  return frob_norm_sq(matmul(x, subtract(w_q, w)));
}

double proxy_loss(const Matrix& w, const Matrix& w_q, const CalibrationView& x) {
  if (w.rows() != w_q.rows() || w.cols() != w_q.cols()) {
    throw ShapeError("proxy_loss: W and W_q differ in shape");
  }
  return frob_norm_sq(x.apply(subtract(w_q, w)));
}

ComqSolver::ComqSolver(Matrix w, CalibrationView x, const QuantConfig& cfg)
    : w_(std::move(w)), x_(std::move(x)), cfg_(cfg) {
  cfg_.validate();
  if (w_.empty()) throw ShapeError("COMQ: empty weight matrix");
  if (x_.samples() == 0) throw ShapeError("COMQ: empty calibration matrix");
  if (x_.features() != w_.rows()) {
    throw ShapeError("COMQ: calibration has " + std::to_string(x_.features()) +
                     " features but weights have " + std::to_string(w_.rows()) + " rows");
  }
  if (x_.per_column() && x_.ordered_columns() != w_.cols()) {
    throw ShapeError("COMQ: calibration view orders a different number of columns");
  }
  require_finite(w_, "weights");
  require_finite(x_.matrix(), "calibration");

  layout_ = UnitLayout(w_.rows(), w_.cols(), cfg_.granularity);
  params_ = compute_unit_params(w_, layout_, cfg_.bits, cfg_.lambda);

  xt_ = transpose(x_.matrix());
  feature_norm_sq_.resize(xt_.rows());
  for (std::size_t f = 0; f < xt_.rows(); ++f) feature_norm_sq_[f] = dot(xt_.row(f), xt_.row(f));

  codes_ = CodeMatrix(w_.rows(), w_.cols());
  w_q_ = w_;
  for (std::size_t i = 0; i < w_.rows(); ++i) {
    for (std::size_t j = 0; j < w_.cols(); ++j) {
      const QuantParams& p = params_[layout_.unit_of(i, j)];
      if (p.degenerate()) w_q_(i, j) = p.constant;
    }
  }
  ut_ = Matrix(w_.cols(), x_.samples());
  column_loss_.assign(w_.cols(), 0.0);
  row_quantized_.assign(w_.rows(), 0);
}

void ComqSolver::update_coordinate(std::size_t i, std::size_t j) {
  const QuantParams& p = params_[layout_.unit_of(i, j)];
  if (p.degenerate()) {
    codes_(i, j) = 0;
    return;
  }
  const double w = w_(i, j);
  const double nx = feature_norm_sq(j, i);
  if (nx == 0.0) {
    // Row invisible to the objective: plain rounding, residual unchanged.
    codes_(i, j) = rtn_code(w, p);
    w_q_(i, j) = p.delta * static_cast<double>(codes_(i, j));
    return;
  }

  const auto x = feature(j, i);
  auto u = ut_.row(j);
  const double old_err = w - w_q_(i, j);
  double proj = 0.0;
  for (std::size_t t = 0; t < u.size(); ++t) {
    u[t] -= x[t] * old_err;
    proj += u[t] * x[t];
  }

  const double target = (proj + w * nx) / (p.delta * nx);
  const double lo = static_cast<double>(p.code_min());
  const double hi = static_cast<double>(p.code_max());
  const double rounded = std::clamp(round_half_away(target), lo, hi);
  const auto code = static_cast<std::int64_t>(rounded);
  codes_(i, j) = code;
  w_q_(i, j) = p.delta * static_cast<double>(code);

  const double new_err = w - w_q_(i, j);
  double loss = 0.0;
  for (std::size_t t = 0; t < u.size(); ++t) {
    u[t] += x[t] * new_err;
    loss += u[t] * u[t];
  }
  column_loss_[j] = loss;
}

double ComqSolver::sum_column_losses() const noexcept {
  double total = 0.0;
  for (double l : column_loss_) total += l;
  return total;
}

double ComqSolver::current_loss() const noexcept { return sum_column_losses(); }

void ComqSolver::update_row(std::size_t i) {
  if (i >= w_.rows()) throw std::out_of_range("update_row: row index out of range");
  parallel_for(w_.cols(), [&](std::size_t j) { update_coordinate(i, j); });
  if (!row_quantized_[i]) {
    row_quantized_[i] = 1;
    ++quantized_rows_;
  }
  trace_.push_back({LossEvent::Kind::RowUpdate, iteration_, i, sum_column_losses()});
  if (feasible() && !feasible_recorded_) {
    first_feasible_event_ = trace_.size() - 1;
    feasible_recorded_ = true;
  }
}

void ComqSolver::sweep() {
  const std::size_t m = w_.rows();
  const std::size_t n = w_.cols();
  // history[j * m + i]: loss of column j right after row i was updated.
  std::vector<double> history(m * n);
  parallel_for(n, [&](std::size_t j) {
    for (std::size_t i = 0; i < m; ++i) {
      update_coordinate(i, j);
      history[j * m + i] = column_loss_[j];
    }
  });
  for (std::size_t i = 0; i < m; ++i) {
    double total = 0.0;
    for (std::size_t j = 0; j < n; ++j) total += history[j * m + i];
    if (!row_quantized_[i]) {
      row_quantized_[i] = 1;
      ++quantized_rows_;
    }
    trace_.push_back({LossEvent::Kind::RowUpdate, iteration_, i, total});
    if (feasible() && !feasible_recorded_) {
      first_feasible_event_ = trace_.size() - 1;
      feasible_recorded_ = true;
    }
  }
}

void ComqSolver::refit_column_blocks(std::size_t j) {
  const std::size_t blocks = layout_.blocks_per_column();
  const std::size_t s = x_.samples();
  auto u = ut_.row(j);
  std::vector<double> v(s);
  // One cyclic pass: each block's scale is the exact least-squares fit to
  // the column target minus every other block's current contribution.
  for (std::size_t b = 0; b < blocks; ++b) {
    const std::size_t unit = j * blocks + b;
    QuantParams& p = params_[unit];
    if (p.degenerate()) continue;
    const UnitDescriptor& d = layout_.unit(unit);
    std::fill(v.begin(), v.end(), 0.0);
    for (std::size_t i = d.row_begin; i < d.row_end; ++i) {
      const double q = static_cast<double>(codes_(i, j));
      if (q == 0.0) continue;
      const auto x = feature(j, i);
      for (std::size_t t = 0; t < s; ++t) v[t] += x[t] * q;
    }
    double norm = 0.0;
    double num = 0.0;
    for (std::size_t t = 0; t < s; ++t) {
      norm += v[t] * v[t];
      num += (u[t] + p.delta * v[t]) * v[t];
    }
    if (norm == 0.0) continue;
    const double fitted = num / norm;
    if (!(fitted > 0.0) || !std::isfinite(fitted)) continue;
    const double step = fitted - p.delta;
    for (std::size_t t = 0; t < s; ++t) u[t] -= step * v[t];
    p.delta = fitted;
  }
}

void ComqSolver::refit_layer_scale() {
  QuantParams& p = params_.front();
  if (p.degenerate()) return;
  const std::size_t n = w_.cols();
  const std::size_t s = x_.samples();
  std::vector<double> num(n, 0.0);
  std::vector<double> den(n, 0.0);
  parallel_for(n, [&](std::size_t j) {
    std::vector<double> v(s, 0.0);
    for (std::size_t i = 0; i < w_.rows(); ++i) {
      const double q = static_cast<double>(codes_(i, j));
      if (q == 0.0) continue;
      const auto x = feature(j, i);
      for (std::size_t t = 0; t < s; ++t) v[t] += x[t] * q;
    }
    const auto u = ut_.row(j);
    for (std::size_t t = 0; t < s; ++t) {
      den[j] += v[t] * v[t];
      num[j] += (u[t] + p.delta * v[t]) * v[t];
    }
  });
  double total_num = 0.0;
  double total_den = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    total_num += num[j];
    total_den += den[j];
  }
  if (total_den == 0.0) return;
  const double fitted = total_num / total_den;
  if (fitted > 0.0 && std::isfinite(fitted)) p.delta = fitted;
}

void ComqSolver::rebuild_column(std::size_t j) {
  auto u = ut_.row(j);
  std::fill(u.begin(), u.end(), 0.0);
  for (std::size_t i = 0; i < w_.rows(); ++i) {
    const double err = w_(i, j) - w_q_(i, j);
    if (err == 0.0) continue;
    const auto x = feature(j, i);
    for (std::size_t t = 0; t < u.size(); ++t) u[t] += x[t] * err;
  }
  column_loss_[j] = dot(u, u);
}

void ComqSolver::rebuild_all() {
  parallel_for(w_.cols(), [&](std::size_t j) { rebuild_column(j); });
}

void ComqSolver::update_scales() {
  if (!feasible()) throw std::logic_error("update_scales: some rows have not been quantized yet");
  if (layout_.granularity().kind == GranularityKind::PerLayer) {
    refit_layer_scale();
  } else {
    parallel_for(w_.cols(), [&](std::size_t j) { refit_column_blocks(j); });
  }
  for (std::size_t i = 0; i < w_.rows(); ++i) {
    for (std::size_t j = 0; j < w_.cols(); ++j) {
      w_q_(i, j) = dequantize_code(codes_(i, j), params_[layout_.unit_of(i, j)]);
    }
  }
  rebuild_all();
  trace_.push_back({LossEvent::Kind::ScaleUpdate, iteration_, 0, sum_column_losses()});
}

void ComqSolver::run() {
  for (int k = 0; k < cfg_.iterations; ++k) {
    sweep();
    if (cfg_.scale_update) update_scales();
    ++iteration_;
  }
}

void ComqSolver::assign_codes(const CodeMatrix& codes) {
  if (codes.rows() != w_.rows() || codes.cols() != w_.cols()) {
    throw ShapeError("assign_codes: code matrix shape mismatch");
  }
  w_q_ = dequantize_matrix(codes, layout_, params_);
  codes_ = codes;
  std::fill(row_quantized_.begin(), row_quantized_.end(), 1);
  quantized_rows_ = w_.rows();
  if (!feasible_recorded_) {
    first_feasible_event_ = trace_.empty() ? 0 : trace_.size() - 1;
    feasible_recorded_ = true;
  }
  rebuild_all();
}

Matrix ComqSolver::residual() const { return transpose(ut_); }

Matrix ComqSolver::fresh_residual() const { return x_.apply(subtract(w_, w_q_)); }

QuantResult ComqSolver::result() const {
  QuantResult r;
  r.method = cfg_.method;
  r.w_q = w_q_;
  r.codes = codes_;
  r.layout = layout_;
  r.params = params_;
  r.loss_trace = trace_;
  r.first_feasible_event = first_feasible_event_;
  return r;
}

QuantResult rtn_quantize_layer(const Matrix& w, const QuantConfig& cfg) {
  cfg.validate();
  if (w.empty()) throw ShapeError("RTN: empty weight matrix");
  require_finite(w, "weights");
  QuantResult r;
  r.method = Method::RTN;
  r.layout = UnitLayout(w.rows(), w.cols(), cfg.granularity);
  r.params = compute_unit_params(w, r.layout, cfg.bits, cfg.lambda);
  r.codes = rtn_quantize_matrix(w, r.layout, r.params);
  r.w_q = dequantize_matrix(r.codes, r.layout, r.params);
  return r;
}

QuantResult comq_quantize(const Matrix& w, const Matrix& x, const QuantConfig& cfg) {
  return comq_quantize(w, CalibrationView(x), cfg);
}

QuantResult comq_quantize(const Matrix& w, const CalibrationView& x, const QuantConfig& cfg) {
  ComqSolver solver(w, x, cfg);
  solver.run();
  QuantResult r = solver.result();
  r.method = Method::COMQ;
  return r;
}

}  // namespace pcomq
