#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace syncrds {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad parameters or violated preconditions.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

// A state lies outside the engine's state space.
class DomainError : public Error {
 public:
  using Error::Error;
};

// A solver failed to converge or a computation left the representable range.
class NumericalFailure : public Error {
 public:
  explicit NumericalFailure(const std::string& what,
                            std::optional<std::size_t> step = std::nullopt)
      : Error(step ? what + " (step " + std::to_string(*step) + ")" : what),
        step_(step) {}

  std::optional<std::size_t> step() const { return step_; }

 private:
  std::optional<std::size_t> step_;
};

// A caller-supplied hypothesis of a check does not hold (distinct from the
// check itself failing).
class PreconditionViolation : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace syncrds
