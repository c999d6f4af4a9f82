#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>

namespace treeglc {

enum class ErrorCode {
  invalid_argument,  // malformed input or precondition violation
  parse_error,       // CSV / tree text / JSON syntax
  schema_mismatch,   // tree attribute absent from dataset, unknown class column
  not_found,         // unknown node, plot, tree or dataset
  out_of_range,      // threshold or value outside an attribute range
  conflict,          // version precondition failed
  io_error,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Parse failure with a 1-based source location. column is 0 when the
/// location is a whole line.
class ParseError : public Error {
 public:
  ParseError(std::size_t line, std::size_t column, const std::string& message);

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

/// Invalid request document; field is a JSON path such as "nodes[2].left".
class FieldError : public Error {
 public:
  FieldError(std::string field, const std::string& message)
      : Error(ErrorCode::invalid_argument, field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace treeglc
