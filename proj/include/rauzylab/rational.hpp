#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <string>

#include "rauzylab/errors.hpp"

namespace rauzylab {

using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline double to_double(const Rational& q) { return q.convert_to<double>(); }
inline double to_double(double x) { return x; }

// Parses "p/q", "p" or a decimal literal like "0.25" into an exact rational.
inline Rational parse_rational(const std::string& s) {
    auto slash = s.find('/');
    try {
        if (slash != std::string::npos) {
            BigInt p(s.substr(0, slash));
            BigInt q(s.substr(slash + 1));
            if (q == 0) throw ParamOutOfRange("zero denominator in '" + s + "'");
            return Rational(p, q);
        }
        auto dot = s.find('.');
        if (dot == std::string::npos) return Rational(BigInt(s));
        std::string digits = s.substr(0, dot) + s.substr(dot + 1);
        BigInt q = 1;
        for (std::size_t i = dot + 1; i < s.size(); ++i) q *= 10;
        return Rational(BigInt(digits), q);
    } catch (const std::exception& e) {
        throw ParamOutOfRange("cannot parse rational '" + s + "': " + e.what());
    }
}

inline std::string to_string(const Rational& q) {
    return q.str();
}

// Arithmetic traits shared by the exact and float backends.
template <class S>
struct ScalarTraits;

template <>
struct ScalarTraits<double> {
    static constexpr bool exact = false;
    // Relative tie tolerance (against |lambda|); below double-precision trust.
    static constexpr double tie_tolerance = 1e-12;
    static bool is_zero(double x, double scale) { return std::fabs(x) <= tie_tolerance * scale; }
};

template <>
struct ScalarTraits<Rational> {
    static constexpr bool exact = true;
    static bool is_zero(const Rational& x, const Rational&) { return x == 0; }
};

} // namespace rauzylab
