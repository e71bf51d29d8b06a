#pragma once

#include <stdexcept>
#include <string>

namespace jsm {

/// Base of every error thrown by the library.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// File could not be opened, read, or written.
class IoError : public Error
{
public:
    using Error::Error;
};

/// File contents are not in a supported encoding.
class FormatError : public Error
{
public:
    using Error::Error;
};

/// Plane dimensions or channel counts do not agree.
class ShapeError : public Error
{
public:
    using Error::Error;
};

/// Input data carries no usable signal (all-invalid depth, no separation, ...).
class DataError : public Error
{
public:
    using Error::Error;
};

/// Invalid user configuration.
class ConfigError : public Error
{
public:
    using Error::Error;
};

} // namespace jsm
