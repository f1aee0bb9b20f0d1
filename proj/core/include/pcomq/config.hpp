#pragma once

#include <optional>
#include <string_view>

#include "pcomq/quant_grid.hpp"

namespace pcomq {

enum class Method { RTN, COMQ, PermutationCOMQ };
enum class PermutationStrategy { None, JointRow, PerColumn };
// Sort key used to order rows under PermutationStrategy::JointRow.
enum class RowKey { MeanAbs, MaxAbs };

struct QuantConfig {
  Method method = Method::COMQ;
  int bits = 4;
  double lambda = 1.0;
  int iterations = 2;
  Granularity granularity = Granularity::block_wise(64);
  PermutationStrategy permutation = PermutationStrategy::PerColumn;
  RowKey row_key = RowKey::MeanAbs;
  bool scale_update = true;
  // Denominator guard for relative-error metrics.
  double epsilon_rel = 1e-8;

  // Throws std::invalid_argument when a field is out of its domain.
  void validate() const;

  friend bool operator==(const QuantConfig&, const QuantConfig&) = default;
};

std::string_view to_string(Method m) noexcept;
std::string_view to_string(PermutationStrategy s) noexcept;
std::string_view to_string(RowKey k) noexcept;

std::optional<Method> parse_method(std::string_view s) noexcept;
std::optional<PermutationStrategy> parse_permutation(std::string_view s) noexcept;
std::optional<RowKey> parse_row_key(std::string_view s) noexcept;
std::optional<GranularityKind> parse_granularity(std::string_view s) noexcept;

}  // namespace pcomq
