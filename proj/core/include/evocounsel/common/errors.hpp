#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace evocounsel {

/// Base class for every error raised by the engine.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A live backend gave up after its retry budget.
class TransportError : public Error {
 public:
  TransportError(const std::string& what, int attempts)
      : Error(what), attempts_(attempts) {}
  int attempts() const noexcept { return attempts_; }

 private:
  int attempts_;
};

/// Scripted backend ran out of entries or had no matching entry.
class ScriptError : public Error {
 public:
  using Error::Error;
};

/// The model never produced a value that conformed to the requested schema.
class StructuredOutputError : public Error {
 public:
  StructuredOutputError(const std::string& what, std::string last_raw)
      : Error(what), last_raw_(std::move(last_raw)) {}
  const std::string& last_raw() const noexcept { return last_raw_; }

 private:
  std::string last_raw_;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Structural validation failure. `issues` lists one message per offending item.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> issues)
      : Error(join(issues)), issues_(std::move(issues)) {}
  const std::vector<std::string>& issues() const noexcept { return issues_; }

 private:
  static std::string join(const std::vector<std::string>& issues) {
    std::string out = "validation failed";
    for (const auto& i : issues) out += "\n  " + i;
    return out;
  }
  std::vector<std::string> issues_;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

class RetrievalError : public Error {
 public:
  using Error::Error;
};

class ExtractionError : public Error {
 public:
  using Error::Error;
};

class ManagementError : public Error {
 public:
  using Error::Error;
};

class CollisionError : public Error {
 public:
  using Error::Error;
};

class ScoringError : public Error {
 public:
  using Error::Error;
};

class SelectionError : public Error {
 public:
  using Error::Error;
};

class EmissionError : public Error {
 public:
  using Error::Error;
};

/// Failure inside one session step; carries the step index for resumption.
class RunAbort : public Error {
 public:
  RunAbort(const std::string& what, int session_index)
      : Error(what), session_index_(session_index) {}
  int session_index() const noexcept { return session_index_; }

 private:
  int session_index_;
};

}  // namespace evocounsel
