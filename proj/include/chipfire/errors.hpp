#pragma once

#include <stdexcept>

namespace chipfire {

/// Base class for all library failures.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Malformed textual input: graph/divisor files, rational literals, CLI values.
struct ParseError : Error {
  using Error::Error;
};

/// Well-formed input that violates an operation precondition
/// (lattice divisibility, mean-zero requirement, support constraints, ...).
struct ValidationError : Error {
  using Error::Error;
};

/// Enumeration work limit exhausted.
struct BudgetError : Error {
  using Error::Error;
};

/// Graph-level defects: loops, disconnection, size caps, generator asymmetry.
struct StructuralError : Error {
  using Error::Error;
};

/// Iterative eigensolver failed to reach tolerance within the sweep cap.
struct ConvergenceError : StructuralError {
  using StructuralError::StructuralError;
};

}  // namespace chipfire
