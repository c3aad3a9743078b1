#pragma once

#include <stdexcept>
#include <string>

namespace ntp {

// Bad input, bad config, missing files. CLI maps this to exit code 1.
struct UserError : std::runtime_error {
    explicit UserError(const std::string& msg) : std::runtime_error(msg) {}
};

// Broken internal invariant. CLI maps this to exit code 2.
struct InternalError : std::runtime_error {
    explicit InternalError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace ntp
