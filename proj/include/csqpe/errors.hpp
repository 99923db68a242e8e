#pragma once

#include <stdexcept>
#include <string>

namespace csqpe {

// Raised for invalid user-facing parameters (bad model size, alpha out of
// range, unknown config keys). The CLI maps it to exit code 1.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Raised when a caller violates an API precondition (dimension mismatch,
// division by a zero norm).
class ContractError : public std::logic_error {
 public:
  explicit ContractError(const std::string& what) : std::logic_error(what) {}
};

}  // namespace csqpe
