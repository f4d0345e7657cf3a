#pragma once

#include <stdexcept>
#include <string>

namespace trajsmooth {

// Error categories map to CLI exit codes (see tools/): usage errors are
// handled by the flag parser, ConfigError/ValidationError/ParseError exit
// with 3, NumericError with 4.

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace trajsmooth
