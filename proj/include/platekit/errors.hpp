#pragma once

#include <stdexcept>
#include <string>

namespace platekit {

/// Malformed mesh file or similar input data.
struct ParseError : std::runtime_error {
  explicit ParseError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid configuration (study config, boundary layout, method name).
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Patch node configuration cannot support a full quadratic.
struct DegeneratePatchError : std::runtime_error {
  explicit DegeneratePatchError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Patch extension exhausted the admissible neighborhood without reaching rank 6.
struct UnrecoverablePatchError : std::runtime_error {
  explicit UnrecoverablePatchError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Numerical failure in the linear solve (singular or indefinite system).
struct SolveError : std::runtime_error {
  explicit SolveError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace platekit
