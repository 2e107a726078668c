#pragma once

#include <stdexcept>
#include <string>

namespace cebeam {

/// Invalid or inconsistent experiment configuration (CLI exit code 1).
struct config_error : std::runtime_error {
  explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Non-finite value detected in a numerical pipeline (CLI exit code 2).
struct numeric_error : std::runtime_error {
  explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// File read/write failure (CLI exit code 3).
struct io_error : std::runtime_error {
  explicit io_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A lookup table does not match the data it is applied to.
struct stale_lut_error : std::runtime_error {
  explicit stale_lut_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A PSF measurement could not be taken (no peak, grid too coarse, ...).
struct measurement_error : std::runtime_error {
  explicit measurement_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace cebeam
