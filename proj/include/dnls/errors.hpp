#pragma once

#include <stdexcept>
#include <string>

namespace dnls {

/// Invalid user-facing configuration (bad exponents, malformed profile, unknown key).
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Non-finite values or overflow detected in a numerical kernel.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace dnls
