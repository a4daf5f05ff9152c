#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dynbo {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// Raised when Gram + noise*I cannot be factorized even after the jitter ladder.
class NumericalError : public Error {
 public:
  using Error::Error;
};

class DatasetError : public Error {
 public:
  using Error::Error;
};

class ParseError : public DatasetError {
 public:
  ParseError(const std::string& what, std::size_t line)
      : DatasetError(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Failures of a similarity oracle. The external client raises the subclasses.
class OracleError : public Error {
 public:
  using Error::Error;
};

class ProtocolError : public OracleError {
 public:
  using OracleError::OracleError;
};

class HandshakeError : public ProtocolError {
 public:
  using ProtocolError::ProtocolError;
};

// The service answered with an error record.
class RemoteError : public ProtocolError {
 public:
  using ProtocolError::ProtocolError;
};

class TimeoutError : public OracleError {
 public:
  using OracleError::OracleError;
};

class ConnectionClosedError : public OracleError {
 public:
  using OracleError::OracleError;
};

}  // namespace dynbo
