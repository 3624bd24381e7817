#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tspbmc {

/// Base class for every error raised by the verifier pipeline.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Syntax error in term text, carrying the byte offset of the failure.
class TermSyntaxError : public Error {
 public:
  TermSyntaxError(const std::string& what, std::size_t offset)
      : Error(what + " at offset " + std::to_string(offset)), offset_(offset) {}

  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

/// Error in a protocol file; `line` is 1-based, 0 when not tied to a line.
class ProtocolError : public Error {
 public:
  ProtocolError(const std::string& what, std::size_t line = 0)
      : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class ScenarioError : public Error {
 public:
  using Error::Error;
};

class ModelError : public Error {
 public:
  using Error::Error;
};

class SolverError : public Error {
 public:
  using Error::Error;
};

}  // namespace tspbmc
