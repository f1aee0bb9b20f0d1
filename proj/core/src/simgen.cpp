#include "pcomq/simgen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <limits>

namespace pcomq {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

// FNV-1a, 64-bit.
std::uint64_t hash_tag(std::string_view tag) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : tag) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

}  // namespace

RandomStream::RandomStream(std::uint64_t seed, std::string_view tag)
    : engine_(splitmix64(seed ^ splitmix64(hash_tag(tag)))) {}

double RandomStream::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t RandomStream::below(std::uint64_t bound) {
  if (bound == 0) return 0;
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % bound;
  std::uint64_t r;
  do {
    r = engine_();
  } while (r >= limit);
  return r % bound;
}

double RandomStream::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  // 1 - uniform() lies in (0, 1], keeping the logarithm finite.
  const double u1 = 1.0 - uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

void SimWeightParams::validate() const {
  if (m < 1 || n < 1) throw std::invalid_argument("weight dimensions must be positive");
  if (!(base_sigma >= 0.0) || !(row_scale_sigma >= 0.0) || !(col_scale_sigma >= 0.0)) {
    throw std::invalid_argument("sigmas must be non-negative");
  }
  if (!(outlier_fraction >= 0.0 && outlier_fraction < 1.0)) {
    throw std::invalid_argument("outlier fraction must be in [0, 1)");
  }
  if (!(outlier_low <= outlier_high) || !std::isfinite(outlier_low) ||
      !std::isfinite(outlier_high) || outlier_low < 0.0) {
    throw std::invalid_argument("outlier range must satisfy 0 <= low <= high");
  }
}

std::size_t SimWeightParams::outlier_count() const {
  return static_cast<std::size_t>(
      std::ceil(outlier_fraction * static_cast<double>(m) * static_cast<double>(n)));
}

void SimCalibParams::validate() const {
  if (samples < 1 || features < 1) throw std::invalid_argument("calibration dimensions must be positive");
  if (!(mix_epsilon >= 0.0) || !std::isfinite(mix_epsilon)) {
    throw std::invalid_argument("mix epsilon must be non-negative");
  }
}

Matrix gen_weights(const SimWeightParams& p) {
  p.validate();
  RandomStream base(p.seed, "weights/base");
  RandomStream rows(p.seed, "weights/row-scale");
  RandomStream cols(p.seed, "weights/col-scale");
  RandomStream outliers(p.seed, "weights/outliers");

  std::vector<double> row_scale(p.m);
  std::vector<double> col_scale(p.n);
  for (auto& r : row_scale) r = std::exp(p.row_scale_sigma * rows.normal());
  for (auto& c : col_scale) c = std::exp(p.col_scale_sigma * cols.normal());

  Matrix w(p.m, p.n);
  for (std::size_t i = 0; i < p.m; ++i) {
    for (std::size_t j = 0; j < p.n; ++j) {
      w(i, j) = p.base_sigma * base.normal() * row_scale[i] * col_scale[j];
    }
  }

  // Partial Fisher-Yates over flat indices picks distinct positions.
  const std::size_t total = p.m * p.n;
  const std::size_t count = std::min(p.outlier_count(), total);
  std::vector<std::size_t> slots(total);
  for (std::size_t k = 0; k < total; ++k) slots[k] = k;
  auto flat = w.data();
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t pick = k + static_cast<std::size_t>(outliers.below(total - k));
    std::swap(slots[k], slots[pick]);
    const double magnitude = p.outlier_low + (p.outlier_high - p.outlier_low) * outliers.uniform();
    const bool negative = (outliers.next_u64() >> 63) != 0;
    flat[slots[k]] = negative ? -magnitude : magnitude;
  }
  return w;
}

Matrix gen_calibration(const SimCalibParams& p) {
  p.validate();
  RandomStream zs(p.seed, "calibration/z");
  RandomStream gs(p.seed, "calibration/mix");
  Matrix z(p.samples, p.features);
  for (double& v : z.data()) v = zs.normal();
  Matrix mix = Matrix::identity(p.features);
  const double scale = p.mix_epsilon / std::sqrt(static_cast<double>(p.features));
  for (double& v : mix.data()) v += scale * gs.normal();
  return matmul(z, mix);
}

void require_ascending_edges(std::span<const double> edges) {
  if (edges.size() < 2) throw std::invalid_argument("bin edges need at least two entries");
  for (std::size_t k = 1; k < edges.size(); ++k) {
    if (!(edges[k] > edges[k - 1])) throw std::invalid_argument("bin edges must be strictly ascending");
  }
}

std::size_t bin_index(double magnitude, std::span<const double> edges) noexcept {
  const std::size_t bins = edges.size() - 1;
  const auto it = std::upper_bound(edges.begin(), edges.end(), magnitude);
  const auto pos = static_cast<std::size_t>(it - edges.begin());
  if (pos == 0) return 0;
  return std::min(pos - 1, bins - 1);
}

std::vector<std::size_t> magnitude_histogram(const Matrix& w, std::span<const double> edges) {
  require_ascending_edges(edges);
  std::vector<std::size_t> counts(edges.size() - 1, 0);
  for (double v : w.data()) ++counts[bin_index(std::abs(v), edges)];
  return counts;
}

}  // namespace pcomq
