#pragma once

#include <stdexcept>
#include <string>

namespace riskstream {

// Bad input, config, or shape. The CLI maps this to exit code 2.
struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical blowup (NaN/Inf) during training. The CLI maps this to exit code 3.
struct DivergenceError : std::runtime_error {
  explicit DivergenceError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace riskstream
