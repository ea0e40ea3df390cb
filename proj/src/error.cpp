#include "elue/error.hpp"

namespace elue {

std::string_view error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::kValidation: return "validation_error";
    case ErrorCode::kParse: return "parse_error";
    case ErrorCode::kShape: return "shape_error";
    case ErrorCode::kUnknownModule: return "unknown_module";
    case ErrorCode::kEmptySubmission: return "empty_submission";
    case ErrorCode::kLengthMismatch: return "length_mismatch";
    case ErrorCode::kUndefinedCorrelation: return "undefined_correlation";
    case ErrorCode::kInvalidLabel: return "invalid_label";
    case ErrorCode::kPolicyMismatch: return "policy_mismatch";
    case ErrorCode::kInvalidArgument: return "invalid_argument";
    case ErrorCode::kOutOfRange: return "out_of_range";
    case ErrorCode::kDivergence: return "divergence";
    case ErrorCode::kIo: return "io_error";
    case ErrorCode::kNotFound: return "not_found";
    case ErrorCode::kSchema: return "schema_error";
    case ErrorCode::kUsage: return "usage_error";
  }
  return "error";
}

ParseError::ParseError(std::size_t line, std::size_t column, const std::string& message)
    : Error(ErrorCode::kParse, "line " + std::to_string(line) + ", column " +
                                   std::to_string(column) + ": " + message),
      line_(line),
      column_(column) {}

ValidationError::ValidationError(std::string field, const std::string& message)
    : Error(ErrorCode::kValidation, field + ": " + message), field_(std::move(field)) {}

nlohmann::json error_to_json(const std::exception& e) {
  nlohmann::json body{{"message", e.what()}};
  if (const auto* err = dynamic_cast<const Error*>(&e)) {
    body["code"] = std::string(err->code_name());
    body["status"] = static_cast<int>(err->code());
    if (const auto* pe = dynamic_cast<const ParseError*>(&e)) {
      body["line"] = pe->line();
      body["column"] = pe->column();
    }
    if (const auto* ve = dynamic_cast<const ValidationError*>(&e)) body["field"] = ve->field();
  } else {
    body["code"] = "internal_error";
    body["status"] = 1;
  }
  return {{"error", std::move(body)}};
}

int exit_status(const std::exception& e) {
  if (const auto* err = dynamic_cast<const Error*>(&e)) return static_cast<int>(err->code());
  return 1;
}

}  // namespace elue
