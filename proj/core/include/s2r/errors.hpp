#pragma once

#include <stdexcept>
#include <string>

namespace s2r {

// Base of every error the library throws on a broken precondition or bad input.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid argument value (non-divisible sizes, bad counts, ...).
class ArgumentError : public Error {
public:
    using Error::Error;
};

// Tensor shapes inconsistent with each other or with recorded metadata.
class ShapeError : public Error {
public:
    using Error::Error;
};

// A class id outside [0, C).
class OutOfRangeError : public Error {
public:
    using Error::Error;
};

// Synthetic sample without its matching label file.
class PairingError : public Error {
public:
    using Error::Error;
};

// Label value not known to the palette.
class PaletteError : public Error {
public:
    using Error::Error;
};

// Invalid or unknown configuration key / value.
class ConfigError : public Error {
public:
    using Error::Error;
};

// NaN/Inf encountered where a finite value is required.
class NumericError : public Error {
public:
    using Error::Error;
};

// Throws ShapeError with `what` unless `cond` holds.
void require_shape(bool cond, const std::string& what);
// Throws ArgumentError with `what` unless `cond` holds.
void require_arg(bool cond, const std::string& what);

}  // namespace s2r
