#include "fsl/error.hpp"

#include <sstream>

namespace fsl {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidInput: return "InvalidInput";
    case ErrorCode::IoError: return "IoError";
    case ErrorCode::FormatError: return "FormatError";
    case ErrorCode::InsufficientClassSize: return "InsufficientClassSize";
    case ErrorCode::NegativeEntry: return "NegativeEntry";
    case ErrorCode::NeedTwoClasses: return "NeedTwoClasses";
    case ErrorCode::NotBinary: return "NotBinary";
    case ErrorCode::DegenerateMeans: return "DegenerateMeans";
    case ErrorCode::NotPositiveDefinite: return "NotPositiveDefinite";
    case ErrorCode::NumericalFailure: return "NumericalFailure";
    case ErrorCode::RecursionBreakdown: return "RecursionBreakdown";
  }
  return "Unknown";
}

bool is_numerical(ErrorCode code) {
  return code == ErrorCode::NotPositiveDefinite ||
         code == ErrorCode::NumericalFailure ||
         code == ErrorCode::RecursionBreakdown;
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(message), code_(code), message_(message) {}

void Error::add_context(std::string_view context) {
  message_ = std::string(context) + ": " + message_;
}

FormatError::FormatError(std::size_t row, const std::string& detail)
    : Error(ErrorCode::FormatError,
            "row " + std::to_string(row) + ": " + detail),
      row_(row) {}

InsufficientClassSize::InsufficientClassSize(int class_id, std::size_t have,
                                             std::size_t need)
    : Error(ErrorCode::InsufficientClassSize,
            "class " + std::to_string(class_id) + " has " +
                std::to_string(have) + " rows, split needs " +
                std::to_string(need)),
      class_id_(class_id),
      have_(have),
      need_(need) {}

namespace {
std::string negative_message(std::size_t row, std::size_t col, double value) {
  std::ostringstream os;
  os.precision(17);
  os << "negative entry " << value << " at row " << row << ", col " << col;
  return os.str();
}
}  // namespace

NegativeEntry::NegativeEntry(std::size_t row, std::size_t col, double value)
    : Error(ErrorCode::NegativeEntry, negative_message(row, col, value)),
      row_(row),
      col_(col),
      value_(value) {}

RecursionBreakdown::RecursionBreakdown(std::size_t failed_at,
                                       std::size_t produced)
    : Error(ErrorCode::RecursionBreakdown,
            "discriminant recursion broke down at direction " +
                std::to_string(failed_at) + "; " + std::to_string(produced) +
                " directions were produced"),
      failed_at_(failed_at),
      produced_(produced) {}

void throw_invalid(const std::string& message) {
  throw Error(ErrorCode::InvalidInput, message);
}

}  // namespace fsl
