#pragma once

#include <stdexcept>
#include <string>

namespace taskdict {

/// Malformed or inconsistent run configuration (bad key, missing section,
/// unresolvable path). Carries the offending line when known.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Unreadable or inconsistent data: bad image file, empty dataset,
/// dimension mismatch between a model and the signals fed to it.
class DataError : public std::runtime_error {
 public:
  explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Training aborted because the objective estimate blew up.
class DivergenceError : public std::runtime_error {
 public:
  explicit DivergenceError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace taskdict
