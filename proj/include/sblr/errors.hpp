#pragma once

#include <stdexcept>
#include <string>

namespace sblr {

/// Invalid configuration: bad penalty factors, impossible grid, etc.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Invalid or malformed input data: parse failures, broken invariants.
struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace sblr
