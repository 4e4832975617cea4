#pragma once

#include <stdexcept>
#include <string>

namespace bushvac {

/// Invalid or inconsistent configuration / model constants.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Malformed input files, bad columns, non-monotone time, ...
struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure (non-convergence, state left plausibility band, ...).
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace bushvac
