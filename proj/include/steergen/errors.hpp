#pragma once

#include <stdexcept>
#include <string>

namespace steergen {

/// Malformed input data; carries the 1-based line number when known.
struct ParseError : std::runtime_error {
    explicit ParseError(const std::string& msg, long line = -1)
        : std::runtime_error(line >= 0 ? "line " + std::to_string(line) + ": " + msg : msg),
          line_number(line) {}
    long line_number;
};

/// Well-formed input whose content violates the schema (bad field, bad
/// invariant); names the offending field or frame.
struct SchemaError : std::runtime_error {
    explicit SchemaError(const std::string& field, const std::string& msg)
        : std::runtime_error(field + ": " + msg), field_name(field) {}
    std::string field_name;
};

}  // namespace steergen
