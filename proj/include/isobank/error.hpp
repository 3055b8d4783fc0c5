#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace isobank {

// Base for every error the library raises. The CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

// Malformed input: bad JSON/CSV, unknown tag, missing field.
class ParseError : public Error {
public:
  using Error::Error;
};

// Well-formed input that violates a documented invariant. Carries every violation found.
class InvariantError : public Error {
public:
  explicit InvariantError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const { return violations_; }

private:
  std::vector<std::string> violations_;
};

// Arithmetic outside the physical domain (infeasible force, non-positive inversion).
class DomainError : public Error {
public:
  using Error::Error;
};

// Rejection sampling exhausted its attempt budget.
class InfeasibleError : public Error {
public:
  using Error::Error;
};

// Bad configuration: missing credentials, unreachable endpoints, bad flags.
class ConfigError : public Error {
public:
  using Error::Error;
};

// Operation needs more data than was supplied (too few items, pairs, records).
class InsufficientDataError : public Error {
public:
  using Error::Error;
};

class UnsupportedTypeError : public Error {
public:
  using Error::Error;
};

// A template placeholder had no value to substitute.
class TemplateError : public Error {
public:
  using Error::Error;
};

class IoError : public Error {
public:
  using Error::Error;
};

} // namespace isobank
