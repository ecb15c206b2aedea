#pragma once

#include <stdexcept>
#include <string>

namespace phonring {

// Error hierarchy shared by all modules. The C API maps each class to a
// status code; everything inherits from Error so callers can catch broadly.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class ParameterError : public Error {
  public:
    using Error::Error;
};

// Matrix inversion rejected too many near-singular samples.
class SingularError : public Error {
  public:
    using Error::Error;
};

class FitError : public Error {
  public:
    using Error::Error;
};

// Requested value lies outside the tabulated range (e.g. resonance at the
// edge of a frequency grid).
class RangeError : public Error {
  public:
    using Error::Error;
};

class ConfigError : public Error {
  public:
    using Error::Error;
};

class StatisticsError : public Error {
  public:
    using Error::Error;
};

class IoError : public Error {
  public:
    using Error::Error;
};

}  // namespace phonring
