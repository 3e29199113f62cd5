#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace qgraph {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A precondition on an argument failed (bad size, non-positive length, unknown tag).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

/// A matrix that has to be inverted is numerically singular.
class SingularMatrix : public Error {
public:
    using Error::Error;
};

/// The spectral parameter sits on (or too close to) a pole of the object being evaluated.
class PoleError : public Error {
public:
    PoleError(const std::string& what, std::complex<double> location)
        : Error(what), location_(location) {}

    std::complex<double> location() const noexcept { return location_; }

private:
    std::complex<double> location_;
};

} // namespace qgraph
