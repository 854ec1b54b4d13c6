#pragma once

#include <stdexcept>
#include <string>

namespace rctmiss {

// Input data violates a trial-dataset invariant. CLI exit code 3.
struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Estimation cannot proceed: rank deficiency, undefined conversion, singular
// moment matrix, and the like. CLI exit code 4.
struct NumericalError : std::runtime_error {
  explicit NumericalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace rctmiss
