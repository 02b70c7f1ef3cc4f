#pragma once

#include <stdexcept>
#include <string>

namespace fpph {

// Invalid configuration or input: bad spec, box too small, capacity
// exceeded, mismatched space/environment. CLI maps this to exit code 1.
struct config_error : std::runtime_error {
    explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical failure: iteration cap reached, degenerate balancing set,
// violated descent guarantee. CLI maps this to exit code 2.
struct numeric_error : std::runtime_error {
    explicit numeric_error(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace fpph
