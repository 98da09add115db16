#pragma once

#include <stdexcept>
#include <string>

namespace molab {

/// Base of all library exceptions. `code()` doubles as the CLI exit status.
class Error : public std::runtime_error {
 public:
  Error(const std::string& what, int code) : std::runtime_error(what), code_(code) {}
  int code() const noexcept { return code_; }
  virtual const char* kind() const noexcept = 0;

 private:
  int code_;
};

/// A documented precondition was violated (bad input, dimension mismatch, ...).
class PreconditionError : public Error {
 public:
  explicit PreconditionError(const std::string& what, std::string field = {})
      : Error(what, 2), field_(std::move(field)) {}
  const char* kind() const noexcept override { return "precondition"; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

class NumericError : public Error {
 public:
  explicit NumericError(const std::string& what) : Error(what, 3) {}
  const char* kind() const noexcept override { return "numeric"; }
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(what, 4) {}
  const char* kind() const noexcept override { return "io"; }
};

}  // namespace molab
