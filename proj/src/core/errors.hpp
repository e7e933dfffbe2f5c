#pragma once

#include <stdexcept>

namespace dmdhsi {

// Error classes map 1:1 onto CLI exit codes and C API status values:
// IoError -> 2, ValidationError -> 3, AlgorithmError -> 4.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// File not readable/writable, malformed on-disk payloads.
struct IoError : Error {
  using Error::Error;
};

// Arguments or data violating a documented precondition or invariant.
struct ValidationError : Error {
  using Error::Error;
};

// A well-formed input the algorithm cannot process (no stripe found,
// degenerate correlation, all frames skipped, empty reconstruction).
struct AlgorithmError : Error {
  using Error::Error;
};

}  // namespace dmdhsi
