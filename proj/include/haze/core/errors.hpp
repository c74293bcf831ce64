#pragma once

#include <stdexcept>
#include <string>

namespace haze {

// Error taxonomy; the CLI maps ConfigError to exit code 2, everything else to 1.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct InvalidParameter : Error {
    using Error::Error;
};

struct InvalidInput : Error {
    using Error::Error;
};

struct ConfigError : Error {
    using Error::Error;
};

struct DataIntegrityError : Error {
    using Error::Error;
};

struct IoError : Error {
    using Error::Error;
};

struct NumericError : Error {
    using Error::Error;
};

}  // namespace haze
