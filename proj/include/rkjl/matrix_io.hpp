#pragma once

// Binary matrix files:
//
//   offset  size  content
//   0       4     magic "RKMX"
//   4       4     format version, uint32 little-endian (currently 1)
//   8       8     rows, uint64 little-endian
//   16      8     cols, uint64 little-endian
//   24      8·r·c row-major IEEE-754 binary64, little-endian
//
// Vectors are stored as r×1 matrices.

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "rkjl/error.hpp"
#include "rkjl/linalg.hpp"

namespace rkjl {

inline constexpr std::array<char, 4> kMatrixMagic{'R', 'K', 'M', 'X'};
inline constexpr std::uint32_t kMatrixFormatVersion = 1;
inline constexpr std::size_t kMatrixHeaderBytes = 24;

namespace detail {

template <typename T>
void put_le(std::vector<unsigned char>& out, T value) {
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<unsigned char>(value >> (8 * i)));
}

template <typename T>
T get_le(const unsigned char* p) {
  T v = 0;
  for (std::size_t i = 0; i < sizeof(T); ++i) v |= static_cast<T>(p[i]) << (8 * i);
  return v;
}

}  // namespace detail

inline std::vector<unsigned char> encode_matrix(const DenseMatrix& A) {
  std::vector<unsigned char> out;
  out.reserve(kMatrixHeaderBytes + 8 * A.data().size());
  out.insert(out.end(), kMatrixMagic.begin(), kMatrixMagic.end());
  detail::put_le<std::uint32_t>(out, kMatrixFormatVersion);
  detail::put_le<std::uint64_t>(out, A.rows());
  detail::put_le<std::uint64_t>(out, A.cols());
  for (double e : A.data()) detail::put_le<std::uint64_t>(out, std::bit_cast<std::uint64_t>(e));
  return out;
}

inline DenseMatrix decode_matrix(std::span<const unsigned char> bytes) {
  if (bytes.size() < 4) throw FormatError("matrix file truncated inside magic", bytes.size());
  if (std::memcmp(bytes.data(), kMatrixMagic.data(), 4) != 0) {
    throw FormatError("bad magic, expected \"RKMX\"", 0);
  }
  if (bytes.size() < kMatrixHeaderBytes) throw FormatError("matrix file truncated inside header", bytes.size());
  const auto version = detail::get_le<std::uint32_t>(bytes.data() + 4);
  if (version != kMatrixFormatVersion) {
    throw FormatError("unsupported matrix format version " + std::to_string(version) + ", expected " +
                          std::to_string(kMatrixFormatVersion),
                      4);
  }
  const auto rows = detail::get_le<std::uint64_t>(bytes.data() + 8);
  const auto cols = detail::get_le<std::uint64_t>(bytes.data() + 16);
  const std::size_t payload = bytes.size() - kMatrixHeaderBytes;
  if (cols != 0 && rows > payload / 8 / cols) {
    throw FormatError("matrix file truncated: header declares " + std::to_string(rows) + "x" + std::to_string(cols) +
                          " but only " + std::to_string(payload) + " data bytes follow",
                      bytes.size());
  }
  const std::size_t count = static_cast<std::size_t>(rows * cols);
  if (payload != count * 8) {
    throw FormatError("matrix file has " + std::to_string(payload - count * 8) + " trailing bytes",
                      kMatrixHeaderBytes + count * 8);
  }
  std::vector<double> data(count);
  for (std::size_t i = 0; i < count; ++i) {
    const std::size_t off = kMatrixHeaderBytes + 8 * i;
    data[i] = std::bit_cast<double>(detail::get_le<std::uint64_t>(bytes.data() + off));
    if (!std::isfinite(data[i])) throw FormatError("non-finite matrix entry", off);
  }
  return DenseMatrix(rows, cols, std::move(data));
}

inline void write_matrix(const std::string& path, const DenseMatrix& A) {
  const auto bytes = encode_matrix(A);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open '" + path + "' for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("write to '" + path + "' failed");
}

inline DenseMatrix read_matrix(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open '" + path + "' for reading");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  try {
    return decode_matrix(bytes);
  } catch (const FormatError& e) {
    throw FormatError(path + ": " + e.message(), e.offset());
  }
}

inline void write_vector(const std::string& path, const RealVector& v) {
  write_matrix(path, DenseMatrix(v.size(), 1, v));
}

inline RealVector read_vector(const std::string& path) {
  DenseMatrix M = read_matrix(path);
  if (M.cols() != 1) throw DimensionError(path + ": expected a column vector, got " + std::to_string(M.cols()) + " columns");
  return RealVector(M.data().begin(), M.data().end());
}

}  // namespace rkjl
