#pragma once

#include <stdexcept>
#include <string>

namespace fitest {

inline constexpr const char* kVersion = "0.1.0";

// Invalid run configuration (bad flags, out-of-range parameters).
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed or inconsistent input data.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// A computation that cannot proceed: degenerate sample, empty usable region,
// solver failure.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace fitest
