#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace semq {

// Byte range [begin, end) into the original query text.
struct Span {
  std::size_t begin = 0;
  std::size_t end = 0;
};

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Lexing/parsing failure; carries the offending span of the query text.
class ParseError : public Error {
 public:
  ParseError(std::string message, Span span) : Error(std::move(message)), span_(span) {}
  Span span() const { return span_; }

 private:
  Span span_;
};

class BindError : public Error {
 public:
  using Error::Error;
};

class CsvError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class ExecError : public Error {
 public:
  using Error::Error;
};

// Raised by the gateway once all transport retries are exhausted.
class TransportError : public Error {
 public:
  using Error::Error;
};

}  // namespace semq
