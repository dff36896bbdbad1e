#ifndef NVSINGLET_ERRORS_HPP
#define NVSINGLET_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace nvs {

// Invalid user input (bad config value, malformed file, under-determined fit setup).
class validation_error : public std::runtime_error {
 public:
  explicit validation_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failure at runtime (step-size underflow, singular system, non-convergence).
class numeric_error : public std::runtime_error {
 public:
  explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace nvs

#endif
