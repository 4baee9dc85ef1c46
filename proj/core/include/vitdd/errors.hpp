#pragma once

#include <stdexcept>

namespace vitdd {

/// Base class for all errors raised by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Tensor shape or axis mismatch. Messages name the offending shapes.
struct DimensionError : Error {
  using Error::Error;
};

/// Invalid configuration value or combination.
struct ConfigError : Error {
  using Error::Error;
};

/// Dataset-level problems: missing files, empty splits, bad manifests.
struct DataError : Error {
  using Error::Error;
};

/// Malformed file contents (PPM headers, checkpoints, CSV rows).
struct FormatError : Error {
  using Error::Error;
};

/// Class label outside the valid range.
struct LabelError : Error {
  using Error::Error;
};

/// Non-finite values or numeric divergence.
struct NumericError : Error {
  using Error::Error;
};

/// API precondition breached by the caller.
struct ContractError : Error {
  using Error::Error;
};

/// Operation attempted in the wrong state (e.g. attention capture disabled).
struct StateError : Error {
  using Error::Error;
};

/// Face detector returned something outside its contract.
struct DetectorError : Error {
  using Error::Error;
};

}  // namespace vitdd
