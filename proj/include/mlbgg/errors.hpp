#pragma once

#include <stdexcept>
#include <string>

namespace mlbgg
{

/// Raised for out-of-domain model parameters (nonpositive intensity, rho
/// outside [0,1], ...).
class ParameterError : public std::invalid_argument
{
  public:
    using std::invalid_argument::invalid_argument;
};

/// Raised when two sequences that must line up do not.
class DimensionError : public std::length_error
{
  public:
    using std::length_error::length_error;
};

/// Raised when an input violates a structural invariant (e.g. a cumulative
/// path that decreases).
class InvariantError : public std::logic_error
{
  public:
    using std::logic_error::logic_error;
};

/// Config-file problems; `field()` is the dotted path of the offending key.
class ConfigError : public std::runtime_error
{
  public:
    ConfigError(std::string field, std::string const& message)
        : std::runtime_error(field.empty() ? message : field + ": " + message),
          field_(std::move(field))
    {
    }

    std::string const& field() const noexcept { return field_; }

  private:
    std::string field_;
};

} // namespace mlbgg
