#pragma once

#include <stdexcept>
#include <string>

namespace ctgcn {

// Invalid parameters or malformed configuration. CLI exit code 2.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unusable input data (parse failures, ordering violations, missing values,
// shape mismatches). CLI exit code 3.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Data is well-formed but too short for the requested operation.
class InsufficientDataError : public DataError {
 public:
  using DataError::DataError;
};

// A pipeline stage could not run or produced no usable result. CLI exit code 4.
class StageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace ctgcn
