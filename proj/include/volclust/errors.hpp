#pragma once

#include <stdexcept>
#include <string>

namespace volclust {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad user input: malformed config, invalid flags, unusable grids.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// A numerical routine could not produce a trustworthy answer.
class NumericalError : public Error {
public:
    using Error::Error;
};

class BadGrid : public ConfigError {
public:
    using ConfigError::ConfigError;
};

class NonIntegrable : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class DegenerateDensity : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class OutOfBand : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class NoConvergence : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class DegenerateVega : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class Instability : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class DegenerateDesign : public NumericalError {
public:
    using NumericalError::NumericalError;
};

class Unidentifiable : public NumericalError {
public:
    using NumericalError::NumericalError;
};

} // namespace volclust
