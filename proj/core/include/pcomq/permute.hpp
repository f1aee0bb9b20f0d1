#pragma once

#include "pcomq/calibration.hpp"
#include "pcomq/comq.hpp"
#include "pcomq/config.hpp"
#include "pcomq/matrix.hpp"
#include "pcomq/plan.hpp"

namespace pcomq {

// JointRow: one row ordering by ascending row key (ties keep original order).
// PerColumn: each column sorted ascending by signed value, stable.
// Throws ShapeError on an empty matrix or std::invalid_argument for
// PermutationStrategy::None.
PermutationPlan build_plan(const Matrix& w, PermutationStrategy strategy,
                           RowKey key = RowKey::MeanAbs);

// Identity plan of the given strategy and shape.
PermutationPlan identity_plan(std::size_t rows, std::size_t cols, PermutationStrategy strategy);

// W_p: row p of column j is W(forward_j[p], j).
Matrix apply_plan(const Matrix& w, const PermutationPlan& plan);

// Inverse of apply_plan; restore(apply_plan(W)) == W bit-exactly.
Matrix restore(const Matrix& w_permuted, const PermutationPlan& plan);

// Calibration seen by the permuted weights, so that X_p W_p == X W.
// JointRow materializes X with reordered columns; PerColumn returns a
// per-output-column view over the unchanged X.
CalibrationView align_calibration(const Matrix& x, const PermutationPlan& plan);

// Build plan, quantize the permuted layer with COMQ, restore row order.
QuantResult permutation_comq(const Matrix& w, const Matrix& x, const QuantConfig& cfg);

// Dispatches on cfg.method. X is ignored (and may be empty) for RTN.
QuantResult quantize(const Matrix& w, const Matrix& x, const QuantConfig& cfg);

}  // namespace pcomq
