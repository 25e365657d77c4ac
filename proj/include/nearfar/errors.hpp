#pragma once

#include <stdexcept>
#include <string>

namespace nearfar {

// Error categories map 1:1 onto CLI exit codes (usage=1, config=2,
// schema/parse=3, numerical=4).
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SchemaError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NumericError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace nearfar
