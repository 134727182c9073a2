#pragma once

#include <stdexcept>
#include <string>

namespace windcast {

// Base for all library failures. The CLI maps each subclass to a stable exit
// code, so new failure kinds should derive from one of the three below.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace windcast
