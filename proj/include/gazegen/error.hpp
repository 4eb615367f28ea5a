#pragma once

#include <stdexcept>
#include <string>

namespace gazegen {

// Base class for all errors raised by this library.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

// Bad inputs: malformed files, violated preconditions, out-of-range
// parameters. Mapped to exit code 2 by the CLI.
class InputError : public Error {
public:
    explicit InputError(const std::string& msg) : Error(msg) {}
};

// Numeric failures: rank-deficient designs, degenerate MTLD, zero
// variance. Mapped to exit code 3 by the CLI.
class NumericError : public Error {
public:
    explicit NumericError(const std::string& msg) : Error(msg) {}
};

} // namespace gazegen
