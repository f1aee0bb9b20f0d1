#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "pcomq/calibration.hpp"
#include "pcomq/config.hpp"
#include "pcomq/matrix.hpp"
#include "pcomq/plan.hpp"
#include "pcomq/quant_grid.hpp"

namespace pcomq {

struct LossEvent {
  enum class Kind { RowUpdate, ScaleUpdate };
  Kind kind = Kind::RowUpdate;
  int iteration = 0;  // 1-based outer iteration
  std::size_t row = 0;  // row index for RowUpdate, 0 for ScaleUpdate
  double loss = 0.0;
};

struct QuantResult {
  Method method = Method::COMQ;
  // Dequantized weights in the original row order.
  Matrix w_q;
  // Codes, layout and params live in the quantization space (permuted when a
  // plan is present).
  CodeMatrix codes;
  UnitLayout layout;
  std::vector<QuantParams> params;
  std::optional<PermutationPlan> plan;
  // One event per row update and per scale update.
  std::vector<LossEvent> loss_trace;
  // Index of the first event after which every coordinate holds an integer
  // code. Earlier events start from the real-valued initialization W_q = W,
  // so the loss may rise while the first sweep rounds rows onto the grid.
  std::size_t first_feasible_event = 0;
};

// ||X (W_q - W)||_F^2
double proxy_loss(const Matrix& w, const Matrix& w_q, const Matrix& x);
// Sum over columns of ||X^(j) (w_q_j - w_j)||^2.
double proxy_loss(const Matrix& w, const Matrix& w_q, const CalibrationView& x);

// Coordinate-descent state for one layer. Rows of W are visited in index
// order; every output column is an independent least-squares problem against
// its calibration view, so column work is spread over worker threads without
// changing results.
class ComqSolver {
 public:
  // Computes per-unit params with cfg.lambda and starts from W_q = W, so the
  // residual U = X (W - W_q) is exactly zero. Throws ShapeError on
  // non-conforming or empty inputs and std::invalid_argument on a bad config.
  ComqSolver(Matrix w, CalibrationView x, const QuantConfig& cfg);

  // Re-optimizes the codes of row i in every column with all other codes and
  // all scales held fixed. Appends one RowUpdate event.
  void update_row(std::size_t i);
  // update_row for i = 0 .. m-1; identical results, columns run in parallel.
  void sweep();
  // Least-squares refit of every unit's scale for the current codes. Requires
  // every row to hold integer codes. Appends one ScaleUpdate event.
  void update_scales();
  // Runs cfg.iterations of {sweep, update_scales}.
  void run();

  // Replaces all codes (must lie in their unit ranges) and rebuilds W_q and U.
  void assign_codes(const CodeMatrix& codes);

  const Matrix& weights() const noexcept { return w_; }
  const CodeMatrix& codes() const noexcept { return codes_; }
  const UnitLayout& layout() const noexcept { return layout_; }
  const std::vector<QuantParams>& params() const noexcept { return params_; }
  const Matrix& quantized() const noexcept { return w_q_; }
  const CalibrationView& calibration() const noexcept { return x_; }
  const std::vector<LossEvent>& trace() const noexcept { return trace_; }
  bool feasible() const noexcept { return quantized_rows_ == w_.rows(); }
  int iteration() const noexcept { return iteration_; }

  // Incrementally maintained residual U (samples x cols).
  Matrix residual() const;
  // X^(j) (w_j - w_q_j) recomputed from scratch.
  Matrix fresh_residual() const;
  // ||U||_F^2 of the maintained residual.
  double current_loss() const noexcept;

  QuantResult result() const;

 private:
  std::span<const double> feature(std::size_t j, std::size_t i) const noexcept {
    return xt_.row(x_.source_feature(j, i));
  }
  double feature_norm_sq(std::size_t j, std::size_t i) const noexcept {
    return feature_norm_sq_[x_.source_feature(j, i)];
  }
  void update_coordinate(std::size_t i, std::size_t j);
  void rebuild_column(std::size_t j);
  void rebuild_all();
  void refit_column_blocks(std::size_t j);
  void refit_layer_scale();
  double sum_column_losses() const noexcept;

  Matrix w_;
  CalibrationView x_;
  QuantConfig cfg_;
  UnitLayout layout_;
  std::vector<QuantParams> params_;
  Matrix xt_;  // features x samples, row f is column f of X
  std::vector<double> feature_norm_sq_;
  CodeMatrix codes_;
  Matrix w_q_;
  Matrix ut_;  // cols x samples, row j is column j of U
  std::vector<double> column_loss_;
  std::vector<char> row_quantized_;
  std::size_t quantized_rows_ = 0;
  std::vector<LossEvent> trace_;
  std::size_t first_feasible_event_ = 0;
  bool feasible_recorded_ = false;
  int iteration_ = 1;
};

// Round-to-nearest baseline with the layout and params of cfg.
QuantResult rtn_quantize_layer(const Matrix& w, const QuantConfig& cfg);

// Coordinate-descent quantization of W against calibration X.
QuantResult comq_quantize(const Matrix& w, const Matrix& x, const QuantConfig& cfg);
QuantResult comq_quantize(const Matrix& w, const CalibrationView& x, const QuantConfig& cfg);

}  // namespace pcomq
