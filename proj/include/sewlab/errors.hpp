#pragma once

#include <stdexcept>
#include <string>

namespace sewlab {

// Invalid experiment/model configuration (bad parameters, malformed input).
// CLI maps this to exit code 1.
class config_error : public std::runtime_error {
public:
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

// Numerical failure at run time (factorization breakdown, resolution limits,
// degenerate data). CLI maps this to exit code 3.
class numerical_error : public std::runtime_error {
public:
    explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

// Statistics that cannot be fitted (all-zero errors, nonpositive values).
class degenerate_data_error : public numerical_error {
public:
    explicit degenerate_data_error(const std::string& what) : numerical_error(what) {}
};

} // namespace sewlab
