#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rkjl {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not agree.
class DimensionError : public Error {
public:
  using Error::Error;
};

/// Matrix carries no usable rows (all-zero), so row sampling is undefined.
class DegenerateMatrixError : public Error {
public:
  using Error::Error;
};

class RankDeficiencyError : public Error {
public:
  using Error::Error;
};

/// An argument is outside its admissible range.
class ParameterError : public Error {
public:
  using Error::Error;
};

/// Projection onto the hyperplane of a zero row.
class ProjectionError : public Error {
public:
  using Error::Error;
};

/// A precondition on argument ordering or content was violated.
class ContractError : public Error {
public:
  using Error::Error;
};

/// Malformed binary matrix file or trace CSV.
class FormatError : public Error {
public:
  FormatError(const std::string& what, std::size_t offset)
      : Error(what + " (at byte offset " + std::to_string(offset) + ")"), message_(what), offset_(offset) {}

  std::size_t offset() const noexcept { return offset_; }
  /// The description without the offset suffix.
  const std::string& message() const noexcept { return message_; }

private:
  std::string message_;
  std::size_t offset_;
};

class IoError : public Error {
public:
  using Error::Error;
};

}  // namespace rkjl
