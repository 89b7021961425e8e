#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace blocksel {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input text (edge lists, label files, configs).
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t line = 0)
        : Error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Requested model or parameters cannot be realized (K^2 > n, density target needs P > 1, ...).
class InfeasibleError : public Error {
public:
    using Error::Error;
};

/// A numerical routine failed to produce a usable result.
class NumericalError : public Error {
public:
    using Error::Error;
};

}  // namespace blocksel
