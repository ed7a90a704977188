#pragma once

#include <stdexcept>
#include <string>

namespace exprelax {

/// Invalid user-facing configuration (bad dimension, exponent out of range, ...).
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller broke an interface contract, e.g. a field that does not conform to its grid.
class ContractError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Argument outside the mathematical domain of an operation (ln of a non-positive value, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace exprelax
