#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace extvp {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed N-Triples input. `line` is 1-based.
class NTriplesError : public Error {
 public:
  NTriplesError(std::size_t line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

// Malformed SPARQL text. `offset` is the byte offset of the offending token.
class QuerySyntaxError : public Error {
 public:
  QuerySyntaxError(std::size_t offset, const std::string& what)
      : Error("query syntax error at offset " + std::to_string(offset) + ": " + what),
        offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

// Well-formed SPARQL that uses something outside the supported subset.
class UnsupportedQueryError : public Error {
 public:
  explicit UnsupportedQueryError(const std::string& what)
      : Error("SPARQL 1.1 unsupported: " + what) {}
};

class LookupError : public Error {
 public:
  using Error::Error;
};

// Missing, locked, or inconsistent store on disk.
class StoreError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace extvp
