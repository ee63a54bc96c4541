#pragma once

#include <stdexcept>
#include <string>

namespace lpfno {

/// Base class for everything thrown by this library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Bad shapes, out-of-range parameters, malformed configs. Maps to CLI exit code 1.
struct InvalidArgument : Error {
    using Error::Error;
};

/// File/container problems: missing blobs, truncation, version mismatch. Exit code 1.
struct IoError : Error {
    using Error::Error;
};

/// Solver non-convergence, non-finite values in training. Maps to CLI exit code 2.
struct NumericalError : Error {
    using Error::Error;
};

}  // namespace lpfno
