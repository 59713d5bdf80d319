#pragma once

#include <stdexcept>
#include <string>

namespace blowup {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A transformed system hit a vanishing denominator (f_x + t f_y, f or g).
class SingularTransformError : public Error {
public:
    using Error::Error;
};

/// x* estimation or power-law fitting could not be carried out.
class EstimationError : public Error {
public:
    using Error::Error;
};

} // namespace blowup
