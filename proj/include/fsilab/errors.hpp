#pragma once

#include <stdexcept>
#include <string>

namespace fsilab {

/// Invalid grid sizes or extents.
struct GridError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// A field or state does not match the grid it is used with.
struct DimensionMismatch : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Physical or numerical parameter outside its admissible range.
struct ParameterError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

/// Neumann data with nonzero total flux balance.
struct CompatibilityViolated : std::domain_error {
  using std::domain_error::domain_error;
};

/// Ambient field too large for the weighted metric (negative radicand).
struct AmbientTooLarge : std::domain_error {
  using std::domain_error::domain_error;
};

/// A shifted solve did not meet its residual contract.
struct SolveFailed : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// File could not be read or written.
struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace fsilab
