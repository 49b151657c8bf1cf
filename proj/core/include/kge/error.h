#pragma once

#include <stdexcept>
#include <string>

namespace kge {

// Root of every error thrown by the engine.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Unknown or duplicate entity/edge types.
class SchemaError : public Error {
 public:
  using Error::Error;
};

// Malformed input text (edge files, schema files, communities files).
class ParseError : public Error {
 public:
  using Error::Error;
};

// Invalid configuration values or keys.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// A caller broke a documented precondition.
class ContractViolation : public Error {
 public:
  using Error::Error;
};

// Non-finite loss or gradient during training.
class TrainingFault : public Error {
 public:
  using Error::Error;
};

// The finite-difference oracle could not evaluate its function.
class OracleError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace kge
