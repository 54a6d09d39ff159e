#pragma once

#include <stdexcept>
#include <string>

namespace saferl {

// Shape or size mismatch between operands.
class DimensionError : public std::invalid_argument {
 public:
  explicit DimensionError(const std::string& what) : std::invalid_argument(what) {}
};

// Malformed config or data file.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Non-finite losses, singular systems, solver budget exhaustion. Training
// aborts on these rather than limping on with garbage.
class NumericalError : public std::runtime_error {
 public:
  explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace saferl
