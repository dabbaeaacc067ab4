#pragma once

#include <stdexcept>
#include <string>

namespace pcsma {

// Error taxonomy shared by the library and the CLI exit-code mapping:
//   ValidationError -> exit 3, ResourceError -> exit 4, NumericError -> exit 5.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

// Exceeded memory/state caps or wall-clock budgets.
class ResourceError : public std::runtime_error {
public:
    explicit ResourceError(const std::string& msg) : std::runtime_error(msg) {}
};

// Non-finite values, non-convergence, and similar numeric failures.
class NumericError : public std::runtime_error {
public:
    explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace pcsma
