#pragma once

#include <stdexcept>
#include <string>

namespace sscca {

/// Invalid arguments or configuration. The CLI maps this to exit code 2.
class SpecError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Input data that cannot be used (parse failures, missing values, bad shapes).
/// The CLI maps this to exit code 3.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical procedure failed (non-PD matrix, breakdown after retries).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The CCA solver produced a zero direction on one side.
class DegenerateFitError : public NumericalError {
 public:
  DegenerateFitError(int side, const std::string& what)
      : NumericalError("degenerate fit on side " + std::to_string(side) + ": " + what), side_(side) {}

  int side() const noexcept { return side_; }

 private:
  int side_;
};

/// A metric was requested for inputs on which it is undefined (zero directions).
class UndefinedMetricError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace sscca
