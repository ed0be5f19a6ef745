#pragma once

#include <stdexcept>
#include <string>

namespace mcvar {

/// Argument outside the mathematical domain of a function (a <= 0, t >= T, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Invalid input data; carries the name of the offending field.
class ValidationError : public std::invalid_argument {
 public:
  ValidationError(std::string field, const std::string& message)
      : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}

  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

/// The return target cannot be met by any admissible payoff.
class InfeasibleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Numerical failure: missing bracket, iteration cap, broken invariant.
class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operation called in a state where it has no meaning.
class MisuseError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

}  // namespace mcvar
