#pragma once

#include <stdexcept>
#include <string>

namespace bsde {

/// Invalid configuration or violated precondition. The CLI maps this to exit code 2.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure at run time (Picard divergence, rank-deficient regression,
/// non-finite values). The CLI maps this to exit code 3.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace bsde
