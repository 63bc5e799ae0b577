#pragma once

#include <stdexcept>
#include <string>

namespace coboson {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input outside the mathematical domain of an operation (z >= 1, mu < 1, ...).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Root finding, SVD or fitting did not converge.
class SolverError : public Error {
public:
    using Error::Error;
};

/// A size guard was exceeded (mode cap, partition count, oracle limits).
class CapacityError : public Error {
public:
    using Error::Error;
};

/// Extended-precision evaluation lost too many digits to cancellation.
class AccuracyError : public Error {
public:
    using Error::Error;
};

/// chi_N vanished, so a quantity normalized by it is undefined.
class InfeasibleError : public Error {
public:
    using Error::Error;
};

} // namespace coboson
