#pragma once

#include <stdexcept>
#include <string>

namespace dcomp {

struct ShapeError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct InputError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DomainError : std::domain_error {
  using std::domain_error::domain_error;
};

// boundary of a root-search rectangle passes too close to a root
struct RegionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConditioningError : std::runtime_error {
  ConditioningError(const std::string& msg, double distance)
      : std::runtime_error(msg), distance(distance) {}
  double distance;
};

// Re p does not exceed the growth bound, the Laplace integral diverges
struct LaplaceRouteError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct SpectrumError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace dcomp
