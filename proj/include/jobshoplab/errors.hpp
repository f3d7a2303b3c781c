#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace jsl {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed DSL / OR-Library text. Line and column are 1-based; 0 means unknown.
class ParseError : public Error {
 public:
  ParseError(const std::string& msg, int line, int column)
      : Error(format(msg, line, column)), line_(line), column_(column) {}

  int line() const noexcept { return line_; }
  int column() const noexcept { return column_; }

 private:
  static std::string format(const std::string& msg, int line, int column) {
    if (line <= 0) return msg;
    return "line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + msg;
  }
  int line_;
  int column_;
};

class ReferenceError : public ParseError {
 public:
  ReferenceError(const std::string& id, int line, int column)
      : ParseError("unknown id '" + id + "'", line, column), id_(id) {}
  const std::string& id() const noexcept { return id_; }

 private:
  std::string id_;
};

class DuplicateIdError : public ParseError {
 public:
  DuplicateIdError(const std::string& id, int line, int column)
      : ParseError("duplicate id '" + id + "'", line, column), id_(id) {}
  const std::string& id() const noexcept { return id_; }

 private:
  std::string id_;
};

/// An instance that parsed but breaks one or more model invariants.
class InvalidInstance : public Error {
 public:
  explicit InvalidInstance(std::vector<std::string> violations)
      : Error(join(violations)), violations_(std::move(violations)) {}
  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string out = "invalid instance:";
    for (const auto& s : v) out += "\n  " + s;
    return out;
  }
  std::vector<std::string> violations_;
};

/// Raised by the state machine when an event is not applicable to a state.
class InvalidTransition : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Exact solver refused an instance that is too large.
class SizeGuardError : public Error {
 public:
  using Error::Error;
};

}  // namespace jsl
