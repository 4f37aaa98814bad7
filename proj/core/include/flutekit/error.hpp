#pragma once

#include <stdexcept>
#include <string>

namespace flutekit {

/// Failure categories; the CLI maps each to its own exit code.
enum class ErrorKind {
  input,           // malformed or missing input data
  alignment,       // no usable offset between audio and pressure
  fit_degenerate,  // not enough spread in the data to fit
  invalid_model,   // model parameters violate an invariant
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void throw_input(const std::string& what);
[[noreturn]] void throw_degenerate(const std::string& what);

}  // namespace flutekit
