#pragma once

#include <stdexcept>
#include <string>

namespace corrdetect {

// Argument outside the mathematical domain of an operation (|rho| >= 1 for a
// density, lambda outside the MGF's region of finiteness, x >= 1 for a series).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// A table or series would have to grow past its configured limit.
class CapacityError : public std::length_error {
 public:
  using std::length_error::length_error;
};

// An enumeration over permutations or subsets exceeds its hard budget.
class BudgetError : public std::length_error {
 public:
  using std::length_error::length_error;
};

// Inputs for which a threshold has no meaningful value (rho = 0).
class DegenerateError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace corrdetect
