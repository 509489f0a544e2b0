#pragma once

#include <stdexcept>
#include <string>

namespace har {

// Error categories; the CLI maps each to a distinct exit code.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace har
