#pragma once

#include <boost/multiprecision/cpp_int.hpp>
#include <cmath>
#include <cstdint>
#include <string>

#include "idem/errors.hpp"

namespace idem {

// Exact rational arithmetic for circle norms, Bohr widths and critical radii.
// Arbitrary precision: dilation chains multiply widths by small dyadics many
// times over, so fixed-width numerators would overflow.
using BigInt = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

inline double to_double(const Rational& q) { return q.convert_to<double>(); }

inline Rational rational(long long num, long long den = 1) {
    return Rational(BigInt(num), BigInt(den));
}

// Parses "3", "-3", "1/5".
inline Rational parse_rational(const std::string& s) {
    auto slash = s.find('/');
    try {
        if (slash == std::string::npos) return Rational(BigInt(s));
        BigInt num(s.substr(0, slash));
        BigInt den(s.substr(slash + 1));
        if (den == 0) throw InputError("rational with zero denominator: " + s);
        return Rational(num, den);
    } catch (const std::exception&) {
        throw InputError("malformed rational: " + s);
    }
}

inline std::string rational_string(const Rational& q) {
    std::string s = numerator(q).str();
    if (denominator(q) != 1) s += "/" + denominator(q).str();
    return s;
}

inline BigInt floor_big(const Rational& q) {
    BigInt num = numerator(q), den = denominator(q);
    BigInt quot = num / den;
    if (num < 0 && quot * den != num) --quot;
    return quot;
}

// Fractional part in [0,1).
inline Rational frac_mod1(const Rational& q) { return q - Rational(floor_big(q)); }

// Largest dyadic k/2^bits <= x; positive inputs yield positive outputs.
inline Rational dyadic_floor(double x, int bits = 48) {
    if (!(x > 0)) throw Error("dyadic_floor needs a positive input");
    int e = 0;
    double m = std::frexp(x, &e);  // x = m * 2^e with m in [1/2, 1)
    auto num = BigInt(static_cast<long long>(std::ldexp(m, bits)));
    if (num == 0) num = 1;
    Rational r(num, BigInt(1) << bits);
    int shift = e;
    if (shift > 0) r *= (BigInt(1) << shift);
    if (shift < 0) r /= (BigInt(1) << (-shift));
    return r;
}

// Smallest dyadic k/2^bits >= x.
inline Rational dyadic_ceil(double x, int bits = 48) {
    Rational lo = dyadic_floor(x, bits + 1);
    if (to_double(lo) >= x) return lo;
    return lo + Rational(BigInt(1), BigInt(1) << (bits + 1));
}

}  // namespace idem
