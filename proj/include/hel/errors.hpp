#pragma once

#include <stdexcept>
#include <string>

namespace hel {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Precondition violated: mismatched spaces, out-of-range parameters, malformed input.
class DomainError : public Error {
public:
    using Error::Error;
};

/// An enumeration or solver exceeded its configured size limit.
class CapacityError : public Error {
public:
    using Error::Error;
};

/// A self-refining quadrature did not stabilise within its refinement budget.
class PrecisionError : public Error {
public:
    using Error::Error;
};

/// Configuration or file-format error. `path` names the offending field when known.
class ParseError : public Error {
public:
    explicit ParseError(const std::string& what, std::string path = {})
        : Error(path.empty() ? what : what + ": " + path), path_(std::move(path)) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

}  // namespace hel
