#pragma once

#include <stdexcept>
#include <string>

namespace berry {

// Base class for all library failures.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidParameter : Error { using Error::Error; };
struct DomainError : Error { using Error::Error; };
struct ConvergenceError : Error { using Error::Error; };
struct MixedPhaseError : Error { using Error::Error; };
struct SingularityError : Error { using Error::Error; };
struct DegenerateError : Error { using Error::Error; };
struct DimensionError : Error { using Error::Error; };

} // namespace berry
