#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <vector>

#include "pcomq/matrix.hpp"

namespace pcomq {

// Reproducible random stream. The engine is std::mt19937_64, whose output
// sequence is fixed by the standard; uniforms and normals are derived here
// rather than through <random> distributions, which are implementation
// defined. Each (seed, tag) pair selects an independent stream.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::string_view tag);

  std::uint64_t next_u64() { return engine_(); }
  // Uniform in [0, 1) with 53 random bits.
  double uniform();
  // Uniform integer in [0, bound), unbiased (rejection sampling).
  std::uint64_t below(std::uint64_t bound);
  // Standard normal via the Box-Muller transform; variates come in pairs and
  // the second of each pair is cached.
  double normal();

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

struct SimWeightParams {
  std::size_t m = 64;
  std::size_t n = 64;
  double base_sigma = 0.05;
  double row_scale_sigma = 0.3;
  double col_scale_sigma = 0.3;
  double outlier_fraction = 0.01;
  double outlier_low = 3.0;
  double outlier_high = 6.0;
  std::uint64_t seed = 0;

  // Throws std::invalid_argument for out-of-domain values.
  void validate() const;
  std::size_t outlier_count() const;
};

struct SimCalibParams {
  std::size_t samples = 256;
  std::size_t features = 64;
  double mix_epsilon = 0.1;
  std::uint64_t seed = 0;

  void validate() const;
};

// base_sigma * g_ij * exp(row_sigma * u_i) * exp(col_sigma * v_j) with
// standard normals g, u, v, then ceil(fraction * m * n) distinct entries
// replaced by +-Uniform[low, high].
Matrix gen_weights(const SimWeightParams& p);

// X = Z (I + eps * G / sqrt(n)) with Z (samples x n) and G (n x n) standard
// normal.
Matrix gen_calibration(const SimCalibParams& p);

// Counts of |W| per bin [e_k, e_{k+1}). Magnitudes below the first edge land
// in the first bin and magnitudes at or above the last edge in the last bin,
// so counts always sum to W.size(). Throws std::invalid_argument unless the
// edges are strictly ascending with at least two entries.
std::vector<std::size_t> magnitude_histogram(const Matrix& w, std::span<const double> edges);

// Bin index for a magnitude under the clamping rule of magnitude_histogram.
std::size_t bin_index(double magnitude, std::span<const double> edges) noexcept;

void require_ascending_edges(std::span<const double> edges);

}  // namespace pcomq
