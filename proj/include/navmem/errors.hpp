#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace navmem {

// Base class for all errors raised by this library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input: a file, a config value, or a model reply that does not
// match its grammar. Keeps the offending raw text for diagnosis.
class ParseError : public Error {
 public:
  explicit ParseError(const std::string& what, std::string raw = {})
      : Error(what), raw_(std::move(raw)) {}
  const std::string& raw() const { return raw_; }

 private:
  std::string raw_;
};

// Well-formed input that violates a documented invariant (dangling neighbor
// id, asymmetric edge, non-orthonormal axes, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// An action outside the currently legal action set.
class IllegalActionError : public Error {
 public:
  using Error::Error;
};

// Network-level failure talking to an external planner endpoint.
class TransportError : public Error {
 public:
  using Error::Error;
};

}  // namespace navmem
