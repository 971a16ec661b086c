#ifndef TRAX_COMMON_HPP
#define TRAX_COMMON_HPP

#include <stdexcept>
#include <string>

namespace trax {

inline constexpr const char* kVersion = "0.1.0";

// Base for all domain errors; the CLI maps these to exit code 1.
struct Error : std::runtime_error {
  explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Structurally broken input (bad reference, dangling half-branch, ...).
struct MalformedError : Error {
  using Error::Error;
};

// Move applied at a branch that does not admit it.
struct InvalidMoveError : Error {
  using Error::Error;
};

// Weight vector outside the expected cone / failing switch conditions.
struct InvalidMeasureError : Error {
  using Error::Error;
};

// Enumeration or orbit walk exceeded its configured budget.
struct ResourceError : Error {
  using Error::Error;
};

// Surface outside the supported range, or no builtin seed for it.
struct UnsupportedError : Error {
  using Error::Error;
};

}  // namespace trax

#endif
