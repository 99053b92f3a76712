#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <string>
#include <string_view>

#include "error.hpp"

namespace hopcycle {

using BigInt = boost::multiprecision::cpp_int;
/// Exact rational, kept in lowest terms with a positive denominator.
using Rational = boost::multiprecision::cpp_rational;

inline BigInt numerator_of(const Rational& r) { return boost::multiprecision::numerator(r); }
inline BigInt denominator_of(const Rational& r) { return boost::multiprecision::denominator(r); }

inline bool is_zero(const Rational& r) { return r == 0; }

inline double to_double(const Rational& r) { return r.convert_to<double>(); }

/// "num/den" form; integers are rendered without a denominator.
inline std::string to_string(const Rational& r) {
    if (denominator_of(r) == 1) return numerator_of(r).str();
    return numerator_of(r).str() + "/" + denominator_of(r).str();
}

/// Accepts "7", "-3/4", " 2 / 5 ".
inline Rational parse_rational(std::string_view text) {
    auto trim = [](std::string_view s) {
        while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
        while (!s.empty() && (s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
        return s;
    };
    auto to_int = [](std::string_view s) {
        if (s.empty()) throw InvalidArgument("empty integer in rational literal");
        std::size_t i = (s.front() == '-' || s.front() == '+') ? 1 : 0;
        if (i == s.size()) throw InvalidArgument("malformed rational literal");
        for (std::size_t k = i; k < s.size(); ++k)
            if (s[k] < '0' || s[k] > '9') throw InvalidArgument("malformed rational literal: " + std::string(s));
        return BigInt(std::string(s.front() == '+' ? s.substr(1) : s));
    };
    text = trim(text);
    auto slash = text.find('/');
    if (slash == std::string_view::npos) return Rational(to_int(text));
    BigInt den = to_int(trim(text.substr(slash + 1)));
    if (den == 0) throw InvalidArgument("zero denominator in rational literal");
    return Rational(to_int(trim(text.substr(0, slash))), den);
}

} // namespace hopcycle
