#pragma once

#include <stdexcept>
#include <string>

namespace oaforge {

/// Input file could not be parsed. Carries the 1-based line number.
class ParseError : public std::runtime_error {
public:
    ParseError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// Requested construction cannot be satisfied (e.g. n > m!, no valid
/// initial half-design found within the retry budget).
class InfeasibleError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Matrix factorization failed (kernel matrix not positive definite at the
/// requested nugget).
class ConditioningError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Operation is outside the supported range (e.g. full-design enumeration
/// beyond m = 7).
class CapabilityError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace oaforge
