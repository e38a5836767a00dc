#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace mfg {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid model or solver parameter. `field()` names the offending input.
class ParameterError : public Error {
 public:
  ParameterError(std::string field, std::string message)
      : Error(field + ": " + message), field_(std::move(field)), message_(std::move(message)) {}
  const std::string& field() const noexcept { return field_; }
  const std::string& message() const noexcept { return message_; }

 private:
  std::string field_;
  std::string message_;
};

// API misuse: missing prerequisites, incompatible shapes.
class UsageError : public Error {
 public:
  using Error::Error;
};

// Non-finite values, singular systems, non-convergence.
class NumericalError : public Error {
 public:
  using Error::Error;
};

// A requested allocation exceeds the configured memory budget.
class ResourceError : public Error {
 public:
  ResourceError(std::uint64_t required_bytes, std::uint64_t budget_bytes)
      : Error("ensemble needs " + std::to_string(required_bytes) +
              " bytes, budget is " + std::to_string(budget_bytes) + " bytes"),
        required_(required_bytes) {}
  std::uint64_t required_bytes() const noexcept { return required_; }

 private:
  std::uint64_t required_;
};

// A documented invariant of an input field does not hold.
class InvariantError : public Error {
 public:
  using Error::Error;
};

}  // namespace mfg
