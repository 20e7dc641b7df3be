#pragma once

#include <stdexcept>
#include <string>

namespace fsoam {

/// Argument outside the mathematical domain of a function (non-finite input,
/// probability outside (0,1), non-positive intensity).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Invalid configuration: quadrature order, modulation order, turbulence or
/// sweep parameters.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Integration region with lo >= hi.
class EmptyRegionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

} // namespace fsoam
