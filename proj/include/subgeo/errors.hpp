#pragma once

#include <stdexcept>
#include <string>

namespace subgeo {

// Argument outside the mathematical domain of an evaluator (x < 1 for phi,
// negative time, a point too close to a reflecting boundary, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class QuadratureError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class SingularityError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Uniformization would need more than the configured rate*time budget.
class OverflowGuardError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The automatically extracted target set reaches the truncation boundary or
// leaves the configured compact bound.
class AutoTargetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TailBoundError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InsufficientDataError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A Monte Carlo construction could not be completed because too many paths
// were censored at the horizon cap.
class UnreliableEstimateError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace subgeo
