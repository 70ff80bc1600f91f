#pragma once

#include <stdexcept>
#include <string>

namespace dosfluct {

/// A precondition on a mathematical argument was violated.
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// An experiment or CLI configuration is malformed or inconsistent.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// A quantity that must hold to tolerance (e.g. a vanishing imaginary part) did not.
class ConsistencyError : public std::runtime_error {
 public:
  explicit ConsistencyError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace dosfluct
