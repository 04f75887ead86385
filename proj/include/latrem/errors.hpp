#pragma once

#include <stdexcept>
#include <string>

namespace latrem {

// Argument outside the mathematical domain of an operation (zero direction,
// d < 3 for exponent formulas, |xi| inside the cone singularity, ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// An enumeration or quadrature budget would be exceeded.
class ResourceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Quadrature or iteration failed to converge.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A standing hypothesis (nonzero curvature, nondegenerate Hessian) fails.
class HypothesisError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Integer frame construction below the empirical size threshold.
class ThresholdError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParameterError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

}  // namespace latrem
