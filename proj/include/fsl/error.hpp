#ifndef FSL_ERROR_HPP
#define FSL_ERROR_HPP

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace fsl {

enum class ErrorCode {
  InvalidInput,
  IoError,
  FormatError,
  InsufficientClassSize,
  NegativeEntry,
  NeedTwoClasses,
  NotBinary,
  DegenerateMeans,
  NotPositiveDefinite,
  NumericalFailure,
  RecursionBreakdown,
};

std::string_view to_string(ErrorCode code);

/// True for errors caused by the numerics rather than by the data or config.
bool is_numerical(ErrorCode code);

/// Base of every error thrown by the library. The message can be prefixed
/// with context (repetition, method) while the dynamic type is preserved.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message);

  ErrorCode code() const noexcept { return code_; }
  const char* what() const noexcept override { return message_.c_str(); }

  void add_context(std::string_view context);

 private:
  ErrorCode code_;
  std::string message_;
};

class FormatError : public Error {
 public:
  FormatError(std::size_t row, const std::string& detail);
  /// 1-based data row (header excluded); 0 for header or empty-file problems.
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

class InsufficientClassSize : public Error {
 public:
  InsufficientClassSize(int class_id, std::size_t have, std::size_t need);
  int class_id() const noexcept { return class_id_; }
  std::size_t have() const noexcept { return have_; }
  std::size_t need() const noexcept { return need_; }

 private:
  int class_id_;
  std::size_t have_;
  std::size_t need_;
};

class NegativeEntry : public Error {
 public:
  NegativeEntry(std::size_t row, std::size_t col, double value);
  std::size_t row() const noexcept { return row_; }
  std::size_t col() const noexcept { return col_; }
  double value() const noexcept { return value_; }

 private:
  std::size_t row_;
  std::size_t col_;
  double value_;
};

class RecursionBreakdown : public Error {
 public:
  RecursionBreakdown(std::size_t failed_at, std::size_t produced);
  /// Index (1-based) of the direction that could not be computed.
  std::size_t failed_at() const noexcept { return failed_at_; }
  /// Number of directions that were produced before the breakdown.
  std::size_t produced() const noexcept { return produced_; }

 private:
  std::size_t failed_at_;
  std::size_t produced_;
};

[[noreturn]] void throw_invalid(const std::string& message);

}  // namespace fsl

#endif  // FSL_ERROR_HPP
