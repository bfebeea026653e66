#pragma once

#include <stdexcept>
#include <string>

namespace homsample {

/// Caller supplied an invalid parameter (bad keep rate, shape mismatch, ...).
class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Input data is malformed or inconsistent.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical quantity is undefined or a computation diverged.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace homsample
