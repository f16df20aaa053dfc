#pragma once

#include <stdexcept>
#include <string>

namespace scn {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad argument or violated precondition.
class InvalidParameter : public Error {
 public:
  using Error::Error;
};

// Malformed or inconsistent configuration input.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A synthesis LMI had no solution.
class InfeasibleError : public Error {
 public:
  using Error::Error;
};

// Solver breakdown, ill conditioning, or non-finite values.
class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace scn
