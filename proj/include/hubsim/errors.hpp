#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace hubsim {

// Invalid run configuration (bad schema, out-of-domain parameter, cross-field rule).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

// Model evaluated outside its validity domain (non-positive weight, zero total mass, ...).
struct ModelError : std::runtime_error {
    explicit ModelError(const std::string& msg) : std::runtime_error(msg) {}
};

// Query beyond table coverage. Carries the horizon that would have sufficed.
struct TableRangeError : std::runtime_error {
    TableRangeError(const std::string& msg, std::int64_t needed)
        : std::runtime_error(msg), needed_horizon(needed) {}
    std::int64_t needed_horizon;
};

// Configured resource cap reached (event count, vertex count, state cap).
struct ResourceError : std::runtime_error {
    explicit ResourceError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace hubsim
