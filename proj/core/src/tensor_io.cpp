#include "pcomq/tensor_io.hpp"

#include <bit>
#include <charconv>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iterator>

namespace pcomq {
namespace {

constexpr std::uint8_t kMagic[4] = {'P', 'Q', 'T', 'N'};
constexpr std::size_t kHeaderPrefix = 4 + 2 + 1 + 1;

void put_le(std::vector<std::uint8_t>& out, std::uint64_t v, int bytes) {
  for (int b = 0; b < bytes; ++b) out.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
}

std::uint64_t get_le(const std::uint8_t* p, int bytes) {
  std::uint64_t v = 0;
  for (int b = 0; b < bytes; ++b) v |= static_cast<std::uint64_t>(p[b]) << (8 * b);
  return v;
}

}  // namespace

std::string_view to_string(TensorErrorKind kind) noexcept {
  switch (kind) {
    case TensorErrorKind::Io:
      return "io error";
    case TensorErrorKind::BadMagic:
      return "bad magic";
    case TensorErrorKind::UnsupportedVersion:
      return "unsupported version";
    case TensorErrorKind::UnsupportedDtype:
      return "unsupported dtype";
    case TensorErrorKind::UnsupportedNdim:
      return "unsupported ndim";
    case TensorErrorKind::BadShape:
      return "bad shape";
    case TensorErrorKind::Truncated:
      return "truncated";
    case TensorErrorKind::TrailingBytes:
      return "trailing bytes";
  }
  return "unknown";
}

std::vector<std::uint8_t> encode_tensor(const Matrix& m, DType dtype) {
  const std::size_t width = dtype == DType::Float64 ? 8 : 4;
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderPrefix + 16 + m.size() * width);
  for (std::uint8_t c : kMagic) out.push_back(c);
  put_le(out, kTensorVersion, 2);
  out.push_back(static_cast<std::uint8_t>(dtype));
  out.push_back(2);
  put_le(out, m.rows(), 8);
  put_le(out, m.cols(), 8);
  for (double v : m.data()) {
    if (dtype == DType::Float64) {
      put_le(out, std::bit_cast<std::uint64_t>(v), 8);
    } else {
      put_le(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)), 4);
    }
  }
  return out;
}

Matrix decode_tensor(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < 4 || !std::equal(std::begin(kMagic), std::end(kMagic), bytes.begin())) {
    throw TensorIoError(TensorErrorKind::BadMagic, "expected \"PQTN\"");
  }
  if (bytes.size() < kHeaderPrefix) {
    throw TensorIoError(TensorErrorKind::Truncated,
                        "header needs " + std::to_string(kHeaderPrefix) + " bytes, got " +
                            std::to_string(bytes.size()));
  }
  const auto version = static_cast<std::uint16_t>(get_le(bytes.data() + 4, 2));
  if (version != kTensorVersion) {
    throw TensorIoError(TensorErrorKind::UnsupportedVersion, "version " + std::to_string(version));
  }
  const std::uint8_t dtype = bytes[6];
  if (dtype > 1) {
    throw TensorIoError(TensorErrorKind::UnsupportedDtype, "dtype " + std::to_string(dtype));
  }
  const std::uint8_t ndim = bytes[7];
  if (ndim != 2) throw TensorIoError(TensorErrorKind::UnsupportedNdim, "ndim " + std::to_string(ndim));
  const std::size_t header = kHeaderPrefix + 8 * ndim;
  if (bytes.size() < header) {
    throw TensorIoError(TensorErrorKind::Truncated,
                        "header needs " + std::to_string(header) + " bytes, got " +
                            std::to_string(bytes.size()));
  }
  const std::uint64_t rows = get_le(bytes.data() + kHeaderPrefix, 8);
  const std::uint64_t cols = get_le(bytes.data() + kHeaderPrefix + 8, 8);
  const std::uint64_t width = dtype == 0 ? 8 : 4;
  if (rows == 0 || cols == 0) {
    throw TensorIoError(TensorErrorKind::BadShape,
                        "dims [" + std::to_string(rows) + ", " + std::to_string(cols) + "]");
  }
  const std::uint64_t available = bytes.size() - header;
  // Guard the product against overflow before comparing byte counts.
  if (rows > available / width || cols > available / width / rows) {
    const bool fits = rows <= UINT64_MAX / cols / width;
    throw TensorIoError(TensorErrorKind::Truncated,
                        "payload expected " +
                            (fits ? std::to_string(rows * cols * width) : std::string("> 2^64")) +
                            " bytes, got " + std::to_string(available));
  }
  const std::uint64_t expected = rows * cols * width;
  if (available != expected) {
    throw TensorIoError(TensorErrorKind::TrailingBytes,
                        "payload expected " + std::to_string(expected) + " bytes, got " +
                            std::to_string(available));
  }
  Matrix m(rows, cols);
  const std::uint8_t* p = bytes.data() + header;
  for (double& v : m.data()) {
    if (dtype == 0) {
      v = std::bit_cast<double>(get_le(p, 8));
    } else {
      v = static_cast<double>(std::bit_cast<float>(static_cast<std::uint32_t>(get_le(p, 4))));
    }
    p += width;
  }
  return m;
}

void write_text_file(const std::filesystem::path& path, std::string_view contents) {
  if (path.empty()) throw TensorIoError(TensorErrorKind::Io, "empty output path");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw TensorIoError(TensorErrorKind::Io, "cannot open " + path.string() + " for writing");
  out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
  out.flush();
  if (!out) throw TensorIoError(TensorErrorKind::Io, "failed writing " + path.string());
}

void write_tensor(const std::filesystem::path& path, const Matrix& m, DType dtype) {
  if (m.empty()) throw TensorIoError(TensorErrorKind::BadShape, "refusing to write an empty matrix");
  const auto bytes = encode_tensor(m, dtype);
  write_text_file(path, std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

Matrix read_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TensorIoError(TensorErrorKind::Io, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw TensorIoError(TensorErrorKind::Io, "failed reading " + path.string());
  try {
    return decode_tensor(bytes);
  } catch (const TensorIoError& e) {
    throw TensorIoError(e.kind(), path.string() + ": " + e.detail());
  }
}

std::string format_real(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, ptr);
}

namespace {

std::string escape_cell(const std::string& cell) {
  if (cell.find_first_of(",\"\n\r") == std::string::npos) return cell;
  std::string out = "\"";
  for (char c : cell) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

void append_row(std::string& out, const std::vector<std::string>& cells) {
  for (std::size_t k = 0; k < cells.size(); ++k) {
    if (k > 0) out += ',';
    out += escape_cell(cells[k]);
  }
  out += '\n';
}

}  // namespace

std::string format_csv(const CsvTable& table) {
  std::string out;
  append_row(out, table.header);
  for (const auto& row : table.rows) append_row(out, row);
  return out;
}

void write_csv(const std::filesystem::path& path, const CsvTable& table) {
  write_text_file(path, format_csv(table));
}

CsvTable error_report_table(const ErrorReport& report) {
  CsvTable t;
  t.header = {"bin_lo", "bin_hi", "count", "mean_rel_err", "proxy_loss", "max_abs_error"};
  for (const auto& bin : report.bins) {
    t.rows.push_back({format_real(bin.lo), format_real(bin.hi), std::to_string(bin.count),
                      bin.mean_rel_err ? format_real(*bin.mean_rel_err) : "nan",
                      format_real(report.proxy_loss), format_real(report.max_abs_error)});
  }
  return t;
}

}  // namespace pcomq
