#include "pcomq/config.hpp"

#include <stdexcept>
#include <string>

namespace pcomq {

void QuantConfig::validate() const {
  if (bits != 2 && bits != 4 && bits != 8) {
    throw std::invalid_argument("bits must be 2, 4 or 8, got " + std::to_string(bits));
  }
  if (!(lambda > 0.0 && lambda <= 1.0)) throw std::invalid_argument("lambda must be in (0, 1]");
  if (iterations < 1) throw std::invalid_argument("iterations must be at least 1");
  if (granularity.kind == GranularityKind::BlockWise && granularity.block_size < 1) {
    throw std::invalid_argument("block size must be at least 1");
  }
  if (!(epsilon_rel > 0.0)) throw std::invalid_argument("epsilon_rel must be positive");
  if (method == Method::PermutationCOMQ && permutation == PermutationStrategy::None) {
    throw std::invalid_argument("permutation-COMQ needs a permutation strategy");
  }
}

std::string_view to_string(Method m) noexcept {
  switch (m) {
    case Method::RTN:
      return "rtn";
    case Method::COMQ:
      return "comq";
    case Method::PermutationCOMQ:
      return "permcomq";
  }
  return "unknown";
}

std::string_view to_string(PermutationStrategy s) noexcept {
  switch (s) {
    case PermutationStrategy::None:
      return "none";
    case PermutationStrategy::JointRow:
      return "joint";
    case PermutationStrategy::PerColumn:
      return "percol";
  }
  return "unknown";
}

std::string_view to_string(RowKey k) noexcept {
  return k == RowKey::MeanAbs ? "mean-abs" : "max-abs";
}

std::optional<Method> parse_method(std::string_view s) noexcept {
  if (s == "rtn") return Method::RTN;
  if (s == "comq") return Method::COMQ;
  if (s == "permcomq") return Method::PermutationCOMQ;
  return std::nullopt;
}

std::optional<PermutationStrategy> parse_permutation(std::string_view s) noexcept {
  if (s == "none") return PermutationStrategy::None;
  if (s == "joint") return PermutationStrategy::JointRow;
  if (s == "percol") return PermutationStrategy::PerColumn;
  return std::nullopt;
}

std::optional<RowKey> parse_row_key(std::string_view s) noexcept {
  if (s == "mean-abs") return RowKey::MeanAbs;
  if (s == "max-abs") return RowKey::MaxAbs;
  return std::nullopt;
}

std::optional<GranularityKind> parse_granularity(std::string_view s) noexcept {
  if (s == "layer") return GranularityKind::PerLayer;
  if (s == "channel") return GranularityKind::PerChannel;
  if (s == "block") return GranularityKind::BlockWise;
  return std::nullopt;
}

}  // namespace pcomq
