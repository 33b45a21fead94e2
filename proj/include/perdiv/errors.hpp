#pragma once

#include <stdexcept>
#include <string>

namespace perdiv {

// Base of every error raised by the library. The CLI maps the two families
// below onto its exit codes (configuration -> 2, numerical -> 3).
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ModelError : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class PreconditionViolated : public ConfigError {
 public:
  using ConfigError::ConfigError;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

// psi evaluated at one of its poles -beta_i.
class PoleError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NearMultipleRoots : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class NoPositiveRealRoot : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class SingularSystem : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class BracketNotFound : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

class SolverError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace perdiv
