#pragma once

#include <stdexcept>
#include <string>

namespace tailsim {

// Base class for every error thrown by the library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Invalid constructor/function arguments: bad distribution parameters,
// malformed grids, out-of-domain evaluation points.
class DomainError : public Error {
public:
    explicit DomainError(const std::string& msg) : Error(msg) {}
};

// Malformed or inconsistent run configuration (JSON schema violations,
// unknown scenario names, unsupported option combinations).
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// Log-space magnitude left the representable window, or an iteration
// diverged past its hard cap.
class OverflowError : public Error {
public:
    explicit OverflowError(const std::string& msg) : Error(msg) {}
};

// An iterative routine hit its iteration budget before reaching the
// requested tolerance.
class ConvergenceError : public Error {
public:
    explicit ConvergenceError(const std::string& msg) : Error(msg) {}
};

// Filesystem failures while writing outputs.
class IoError : public Error {
public:
    explicit IoError(const std::string& msg) : Error(msg) {}
};

}  // namespace tailsim
