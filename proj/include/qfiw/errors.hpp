#pragma once

#include <stdexcept>
#include <string>

namespace qfiw {

// Input/precondition problems: CLI maps these to exit code 2.
class validation_error : public std::invalid_argument {
public:
    explicit validation_error(const std::string& msg) : std::invalid_argument(msg) {}
};

// Runtime numerical failures (non-convergence, lost mass, sign anomalies):
// CLI maps these to exit code 3.
class numerical_error : public std::runtime_error {
public:
    explicit numerical_error(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace qfiw
