#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace chemo {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller broke an interface contract (mismatched grids, wrong sizes).
class ContractViolation : public Error {
 public:
  using Error::Error;
};

/// A scalar parameter lies outside its admissible domain.
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

/// A density field carries a negative or non-finite value.
class DensityViolation : public Error {
 public:
  using Error::Error;
};

/// The elliptic problem is unsolvable because mu does not match the mean of u.
class CompatibilityError : public Error {
 public:
  using Error::Error;
};

/// Non-finite values appeared during assembly of the time derivative.
class NumericalFailure : public Error {
 public:
  NumericalFailure(const std::string& what, std::ptrdiff_t cell)
      : Error(what + " (cell " + std::to_string(cell) + ")"), cell_(cell) {}

  std::ptrdiff_t cell() const { return cell_; }

 private:
  std::ptrdiff_t cell_;
};

/// Malformed or inconsistent run configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Initial data or model parameters fail an admissibility condition.
class InadmissibleData : public Error {
 public:
  using Error::Error;
};

}  // namespace chemo
