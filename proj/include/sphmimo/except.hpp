#pragma once

#include <stdexcept>
#include <string>

namespace sphmimo {

// Bad user input: config files, CSV layouts, out-of-range indices.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A modal coefficient fell below the conditioning floor.
struct ConditioningError : NumericalError {
    using NumericalError::NumericalError;
};

struct RankDeficiencyError : NumericalError {
    using NumericalError::NumericalError;
};

struct PreconditionError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

} // namespace sphmimo
