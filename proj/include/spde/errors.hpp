#pragma once

#include <stdexcept>
#include <string>

namespace spde {

// Bad experiment configuration or inconsistent arguments discovered before
// any numerics ran. CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failure at run time (blow-up, non-convergent series, failed fit).
// CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
public:
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace spde
