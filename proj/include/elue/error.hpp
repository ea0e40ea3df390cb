#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

#include <json.hpp>

namespace elue {

// Each code maps to a distinct CLI exit status and a stable machine-readable name.
enum class ErrorCode {
  kValidation = 10,
  kParse = 11,
  kShape = 12,
  kUnknownModule = 13,
  kEmptySubmission = 14,
  kLengthMismatch = 15,
  kUndefinedCorrelation = 16,
  kInvalidLabel = 17,
  kPolicyMismatch = 18,
  kInvalidArgument = 19,
  kOutOfRange = 20,
  kDivergence = 21,
  kIo = 22,
  kNotFound = 23,
  kSchema = 24,
  kUsage = 25,
};

std::string_view error_code_name(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }
  std::string_view code_name() const { return error_code_name(code_); }

 private:
  ErrorCode code_;
};

// Parse failures carry a 1-based line and column into the offending text.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& message);

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

// Spec validation failures name the offending field.
class ValidationError : public Error {
 public:
  ValidationError(std::string field, const std::string& message);

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

// {"error": {"code": name, "status": int, "message": ..., plus line/column/field}}.
// Exceptions outside the Error hierarchy map to "internal_error" with status 1.
nlohmann::json error_to_json(const std::exception& e);

// Process exit status for an exception: the ErrorCode value, or 1.
int exit_status(const std::exception& e);

}  // namespace elue
