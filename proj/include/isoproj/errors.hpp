#pragma once

#include <stdexcept>
#include <string>

namespace isoproj {

/// Precondition violated by the caller (dimension mismatch, m > n, ...).
class ArgumentError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Gram-Schmidt met a pivot below tolerance.
class RankError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A dimension estimator had too few usable scales.
class EstimationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Every pair of the measure is coincident, so no energy can be formed.
class DegenerateMeasureError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Malformed or inconsistent experiment configuration.
class ConfigError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace isoproj
