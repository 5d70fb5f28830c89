#pragma once

#include <stdexcept>
#include <string>

namespace skellamk {

/// Argument outside the mathematical domain of an operation.
struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

/// A floating-point quantity left the representable range.
struct OverflowError : std::overflow_error {
  using std::overflow_error::overflow_error;
};

/// A series failed to meet its stopping rule within the term budget.
struct ConvergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// The operation has no closed form (or no finite value) for this family.
struct UnsupportedFamily : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A table does not cover the indices an operator needs.
struct SupportError : std::out_of_range {
  using std::out_of_range::out_of_range;
};

/// Numerical differentiation could not certify the requested accuracy.
struct PrecisionLoss : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A reference table misses too much probability mass to be compared against.
struct CoverageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Input exceeds the bounds of a combinatorial oracle.
struct SizeError : std::length_error {
  using std::length_error::length_error;
};

}  // namespace skellamk
