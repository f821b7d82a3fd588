#pragma once

#include <stdexcept>
#include <string>

namespace pdce {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidDimension : Error {
    using Error::Error;
};

struct DimensionMismatch : Error {
    using Error::Error;
};

struct NonFiniteInput : Error {
    using Error::Error;
};

struct NotHermitian : Error {
    using Error::Error;
};

struct InvalidState : Error {
    using Error::Error;
};

// Formula preconditions: T <= 0, n_bar = 0, gamma_m = 0 with g' > 0, ...
struct DomainError : Error {
    using Error::Error;
};

struct SingularCoefficients : Error {
    using Error::Error;
};

struct CoefficientInconsistency : Error {
    using Error::Error;
};

struct IntegrationFailure : Error {
    IntegrationFailure(const std::string& what, double at) : Error(what), time(at) {}
    double time;  // dimensionless s where the step size collapsed
};

struct TruncationOverflow : Error {
    TruncationOverflow(const std::string& what, double at, double pop)
        : Error(what), time(at), population(pop) {}
    double time;
    double population;  // weight found in the top levels
};

}  // namespace pdce
