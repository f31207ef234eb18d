#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>

namespace oaforge {

// Exact rational arithmetic for the design criteria. All closed-form
// identities in this library are tested to equality, not tolerance, so the
// criteria pipeline never touches floating point until the final report.
using BigInt = boost::multiprecision::cpp_int;
using Rat = boost::multiprecision::cpp_rational;

/// Renders "p/q", or just "p" when the denominator is 1.
inline std::string rat_to_string(const Rat& r) {
    std::string s = numerator(r).str();
    if (denominator(r) != 1) {
        s += "/" + denominator(r).str();
    }
    return s;
}

/// Correctly rounded double rendering of an exact rational.
inline double rat_to_double(const Rat& r) {
    return r.convert_to<double>();
}

} // namespace oaforge
