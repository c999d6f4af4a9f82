#include "treeglc/error.hpp"

namespace treeglc {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::parse_error: return "parse_error";
    case ErrorCode::schema_mismatch: return "schema_mismatch";
    case ErrorCode::not_found: return "not_found";
    case ErrorCode::out_of_range: return "out_of_range";
    case ErrorCode::conflict: return "conflict";
    case ErrorCode::io_error: return "io_error";
  }
  return "unknown";
}

ParseError::ParseError(std::size_t line, std::size_t column, const std::string& message)
    : Error(ErrorCode::parse_error,
            "line " + std::to_string(line) +
                (column ? ", column " + std::to_string(column) : std::string{}) + ": " + message),
      line_(line),
      column_(column) {}

}  // namespace treeglc
