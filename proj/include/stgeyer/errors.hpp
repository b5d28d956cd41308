#pragma once

#include <stdexcept>
#include <string>

namespace stgeyer {

/// Malformed input (bad CSV row, invalid JSON syntax).
struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Structurally valid input that violates the schema or a parameter contract.
struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A fit that cannot be carried out or did not converge.
struct EstimationError : std::runtime_error {
  explicit EstimationError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace stgeyer
