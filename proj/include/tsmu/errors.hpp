#pragma once

#include <stdexcept>
#include <string>

namespace tsmu {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Grid or mask shape mismatch.
class ShapeError : public Error {
  public:
    using Error::Error;
};

/// API misuse (empty inputs and the like).
class UsageError : public Error {
  public:
    using Error::Error;
};

/// Projector family is not exclusive and exhaustive.
class PartitionError : public Error {
  public:
    using Error::Error;
};

/// Time interval incompatible with the step size or the schedule ordering.
class ScheduleError : public Error {
  public:
    using Error::Error;
};

/// Invalid scenario configuration. `field` names the offending key.
class ConfigError : public Error {
  public:
    ConfigError(std::string field, const std::string &what)
        : Error(field.empty() ? what : field + ": " + what),
          field_(std::move(field)) {}
    [[nodiscard]] const std::string &field() const noexcept { return field_; }

  private:
    std::string field_;
};

/// Operation requested on an object in the wrong lifecycle state.
class StateError : public Error {
  public:
    using Error::Error;
};

/// Probabilities requested for a set of histories that does not decohere.
class ConsistencyError : public Error {
  public:
    using Error::Error;
};

/// Conditioning on an event of zero probability.
class ConditioningError : public Error {
  public:
    using Error::Error;
};

} // namespace tsmu
