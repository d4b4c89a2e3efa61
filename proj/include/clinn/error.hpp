#pragma once

#include <stdexcept>
#include <string>

namespace clinn {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Non-finite values, guarded divisions, failed root finds.
class NumericalError : public Error {
 public:
  using Error::Error;
};

/// The differentiation engine met an operation it has no derivative rule for.
class UnsupportedPrimitive : public Error {
 public:
  explicit UnsupportedPrimitive(const std::string& name)
      : Error("unsupported primitive: " + name), name_(name) {}
  const std::string& name() const noexcept { return name_; }

 private:
  std::string name_;
};

class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

/// Invalid arguments: unknown case ids, points outside a domain, bad sizes.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

}  // namespace clinn
