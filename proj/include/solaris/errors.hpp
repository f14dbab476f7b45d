#pragma once

#include <stdexcept>
#include <string>

namespace solaris {

/// Input data that violates a schema or invariant (bad CSV row, bad model
/// document, dimension mismatch). Maps to CLI exit code 1.
struct ParseError : std::invalid_argument {
    explicit ParseError(const std::string& msg) : std::invalid_argument(msg) {}
};

/// Numerical or fitting failure (non-finite loss, factorization failure,
/// all optimizer starts failed). Maps to CLI exit code 2.
struct FitError : std::runtime_error {
    explicit FitError(const std::string& msg) : std::runtime_error(msg) {}
};

/// Filesystem-level failure (cannot open/read/write a path). Maps to CLI
/// exit code 3.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

} // namespace solaris
