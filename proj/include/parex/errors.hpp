#pragma once

#include <stdexcept>
#include <string>

namespace parex {

/// Base class for every error raised by the library.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Inconsistent problem or solver configuration.
struct ConfigError : Error {
    using Error::Error;
};

/// A pivot fell below the singularity threshold during LU factorization.
struct SingularMatrix : Error {
    using Error::Error;
};

/// The right-hand side returned a non-finite value.
struct NonFiniteRHS : Error {
    using Error::Error;
};

/// An internal-step iterate became non-finite.
struct NonFiniteState : Error {
    using Error::Error;
};

/// Two independent reference integrations disagree.
struct ReferenceDisagreement : Error {
    using Error::Error;
};

struct IOFailure : Error {
    using Error::Error;
};

}  // namespace parex
