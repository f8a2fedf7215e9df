#pragma once

#include <stdexcept>
#include <string>

namespace sklarsomega {

// Base of every error the library throws on purpose. The CLI maps each
// subclass to its own exit status.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input text: bad header tokens, non-numeric cells, empty files.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Input that parses but cannot support estimation (too few paired units,
// constant scores, values outside the margin's support).
class DegenerateDataError : public Error {
 public:
  using Error::Error;
};

// Estimation failures: infeasible starting point, incompatible
// method/margin combination, too many failed bootstrap replicates.
class FitError : public Error {
 public:
  using Error::Error;
};

// Argument outside a function's domain (p outside (0,1), |rho| >= 1, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

}  // namespace sklarsomega
