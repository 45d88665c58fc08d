#pragma once

#include <stdexcept>
#include <string>

namespace gg {

/// Base for every error the library raises.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Bad or inconsistent input data (files, records, configs).
class DataError : public Error {
 public:
  using Error::Error;
};

/// A record or config that violates a type invariant.
class InvariantError : public DataError {
 public:
  using DataError::DataError;
};

/// Failure talking to an agent or embedding backend.
class TransportError : public Error {
 public:
  TransportError(const std::string& what, int status = 0, bool transient = false)
      : Error(what), status_(status), transient_(transient) {}
  int status() const noexcept { return status_; }
  bool transient() const noexcept { return transient_; }

 private:
  int status_;
  bool transient_;
};

class QueueExhausted : public TransportError {
 public:
  QueueExhausted() : TransportError("scripted response queue exhausted") {}
};

class EmptyInterpretation : public Error {
 public:
  using Error::Error;
};

class NumericalError : public Error {
 public:
  using Error::Error;
};

}  // namespace gg
