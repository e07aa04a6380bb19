#pragma once

#include <stdexcept>
#include <string>

namespace fracmg {

/// Invalid user-facing configuration (bad measure, bad level counts, ...).
struct config_error : std::runtime_error {
    explicit config_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// API misuse: a precondition that correct calling code never violates.
struct usage_error : std::logic_error {
    explicit usage_error(const std::string& msg) : std::logic_error(msg) {}
};

/// Corrupt or inconsistent on-disk data.
struct integrity_error : std::runtime_error {
    explicit integrity_error(const std::string& msg) : std::runtime_error(msg) {}
};

/// A solver reported failure (divergence, iteration cap, lost positivity).
struct solver_error : std::runtime_error {
    explicit solver_error(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace fracmg
