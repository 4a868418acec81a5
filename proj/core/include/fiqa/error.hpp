#pragma once

#include <stdexcept>
#include <string>

namespace fiqa {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A caller-side precondition was violated (dimension mismatch, bad config).
class ContractError : public Error {
 public:
  using Error::Error;
};

/// Input data is malformed, inconsistent, or references something missing.
class DataError : public Error {
 public:
  using Error::Error;
};

/// A computation hit a value it cannot proceed with (degenerate
/// distribution, non-finite gradient, no EER crossing).
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace fiqa
