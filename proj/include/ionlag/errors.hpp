#pragma once

#include <stdexcept>
#include <string>

namespace ionlag {

/// Input outside the mathematical domain of an operation (e.g. nbar <= 0).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Result not representable (overflow, +inf in a log-sum).
class RangeError : public std::range_error {
 public:
  using std::range_error::range_error;
};

/// Physical parameters violate an invariant or reduce to non-finite values.
class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace ionlag
