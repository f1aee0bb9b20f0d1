#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pcomq/matrix.hpp"
#include "pcomq/metrics.hpp"

namespace pcomq {

// On-disk layout (all integers little-endian):
//   "PQTN" | u16 version = 1 | u8 dtype | u8 ndim = 2 | u64 dims[ndim] | payload
// dtype 0 is IEEE-754 binary64, 1 is binary32; payload is row-major.
enum class DType : std::uint8_t { Float64 = 0, Float32 = 1 };

inline constexpr std::uint16_t kTensorVersion = 1;

enum class TensorErrorKind {
  Io,
  BadMagic,
  UnsupportedVersion,
  UnsupportedDtype,
  UnsupportedNdim,
  BadShape,
  Truncated,
  TrailingBytes,
};

std::string_view to_string(TensorErrorKind kind) noexcept;

class TensorIoError : public std::runtime_error {
 public:
  TensorIoError(TensorErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind),
        detail_(message) {}
  TensorErrorKind kind() const noexcept { return kind_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  TensorErrorKind kind_;
  std::string detail_;
};

std::vector<std::uint8_t> encode_tensor(const Matrix& m, DType dtype = DType::Float64);
Matrix decode_tensor(const std::vector<std::uint8_t>& bytes);

void write_tensor(const std::filesystem::path& path, const Matrix& m,
                  DType dtype = DType::Float64);
Matrix read_tensor(const std::filesystem::path& path);

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

// Shortest text is not used: reals always carry 17 significant digits so they
// parse back to the same binary64 value. Locale independent.
std::string format_real(double v);
std::string format_csv(const CsvTable& table);
void write_csv(const std::filesystem::path& path, const CsvTable& table);

// bin_lo,bin_hi,count,mean_rel_err,proxy_loss,max_abs_error
CsvTable error_report_table(const ErrorReport& report);

// Writes `contents` verbatim; throws TensorIoError(Io) with the path on failure.
void write_text_file(const std::filesystem::path& path, std::string_view contents);

}  // namespace pcomq
