// error.hpp: Exception types shared by the nmdecay modules

#pragma once

#include <stdexcept>
#include <string>

namespace nmdecay {

/// Invalid input: bad parameters, unknown case, undersized chain for a horizon.
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// A numerical routine failed (non-convergence, quadrature breakdown, rejected fit).
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace nmdecay
