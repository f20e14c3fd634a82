#pragma once

#include <stdexcept>
#include <string>

namespace pomdplab {

// Error taxonomy mirrors the CLI exit codes:
//   ConfigError -> 2, ModelValidationError -> 3, DeskScaleError -> 4,
//   InternalError -> 5.

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

class ModelValidationError : public std::runtime_error {
public:
    explicit ModelValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

class DeskScaleError : public std::runtime_error {
public:
    explicit DeskScaleError(const std::string& msg) : std::runtime_error(msg) {}
};

class InternalError : public std::runtime_error {
public:
    explicit InternalError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace pomdplab
