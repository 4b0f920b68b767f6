#pragma once

#include <stdexcept>
#include <string>

namespace binmix {

// Error taxonomy. The CLI maps these onto process exit codes, so library code
// should throw the most specific type that applies.
struct ConfigError : std::runtime_error {
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct SolveError : std::runtime_error {
  explicit SolveError(const std::string& what) : std::runtime_error(what) {}
};

// Admissibility violations: densities at or below the floor, or states outside
// the energy model's domain (e.g. negative molar density, packing limit).
struct PositivityError : std::runtime_error {
  PositivityError(const std::string& what, int i, int j, double value)
      : std::runtime_error(what), cell_i(i), cell_j(j), offending_value(value) {}
  explicit PositivityError(const std::string& what)
      : std::runtime_error(what) {}
  int cell_i = -1;
  int cell_j = -1;
  double offending_value = 0.0;
};

struct IoError : std::runtime_error {
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace binmix
