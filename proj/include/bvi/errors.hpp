#pragma once

#include <stdexcept>
#include <string>

namespace bvi {

// Base for everything thrown by this library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Bad user input: shapes, value ranges, config values. CLI exit code 1.
struct ValidationError : Error {
  using Error::Error;
};

struct DimensionError : ValidationError {
  using ValidationError::ValidationError;
};

struct ConfigError : ValidationError {
  using ValidationError::ValidationError;
};

// Broken state at runtime: corrupt files, integrity failures. CLI exit code 2.
struct IntegrityError : Error {
  using Error::Error;
};

struct UnsupportedVersionError : IntegrityError {
  using IntegrityError::IntegrityError;
};

// Mask generation could not satisfy its coverage bounds within the retry budget.
struct GenerationError : Error {
  using Error::Error;
};

// Non-finite loss during optimization; the last good checkpoint is preserved.
struct TrainingAbort : Error {
  using Error::Error;
};

}  // namespace bvi
