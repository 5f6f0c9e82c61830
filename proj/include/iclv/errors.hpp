#pragma once

#include <stdexcept>
#include <string>

namespace iclv {

// Input files / schemas that do not match the declared layout.
struct SchemaError : std::runtime_error {
    explicit SchemaError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numerical-conditioning failures (Cholesky after max jitter, singular solves).
struct ConditioningError : std::runtime_error {
    explicit ConditioningError(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad run configuration (missing keys, empty scenario grid, ...).
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace iclv
