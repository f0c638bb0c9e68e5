#pragma once

#include <stdexcept>
#include <string>

namespace pfsw {

/// Invalid configuration or precondition violation on user-supplied input.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A forward model produced a non-physical or non-finite state.
class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The filter could not complete an assimilation (zero likelihood everywhere,
/// tempering budget exhausted, bisection failure).
class DegeneracyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

}  // namespace pfsw
