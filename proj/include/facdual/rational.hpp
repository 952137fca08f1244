// Exact rational arithmetic helpers used throughout the library.
#ifndef FACDUAL_RATIONAL_HPP
#define FACDUAL_RATIONAL_HPP

#include <gmpxx.h>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace facdual {

/// All deterministic computations in the library are exact rationals.
using Rational = mpq_class;

inline Rational rat(long num, long den = 1) {
    if (den == 0) throw std::invalid_argument("rational with zero denominator");
    Rational r(num, den);
    r.canonicalize();
    return r;
}

/// Parse "num/den" or "num" (decimal integers, optional leading '-').
inline Rational parse_rational(const std::string& s) {
    auto slash = s.find('/');
    try {
        if (slash == std::string::npos) {
            Rational r(s);
            r.canonicalize();
            return r;
        }
        mpz_class num(s.substr(0, slash));
        mpz_class den(s.substr(slash + 1));
        if (den == 0) throw std::invalid_argument("zero denominator");
        Rational r(num, den);
        r.canonicalize();
        return r;
    } catch (const std::invalid_argument&) {
        throw std::invalid_argument("cannot parse rational: \"" + s + "\"");
    }
}

/// Serialize as "num/den" ("num" when the denominator is 1).
inline std::string to_string(const Rational& r) { return r.get_str(); }

inline double to_double(const Rational& r) { return r.get_d(); }

inline Rational pow_rat(const Rational& base, long e) {
    if (e < 0) {
        if (base == 0) throw std::domain_error("0 raised to negative power");
        Rational inv = 1 / base;
        return pow_rat(inv, -e);
    }
    Rational acc = 1, b = base;
    while (e > 0) {
        if (e & 1) acc *= b;
        b *= b;
        e >>= 1;
    }
    return acc;
}

inline Rational factorial(long n) {
    if (n < 0) throw std::domain_error("factorial of negative integer");
    mpz_class f;
    mpz_fac_ui(f.get_mpz_t(), static_cast<unsigned long>(n));
    return Rational(f);
}

inline Rational binomial(long n, long k) {
    if (k < 0 || k > n) return 0;
    mpz_class b;
    mpz_bin_uiui(b.get_mpz_t(), static_cast<unsigned long>(n), static_cast<unsigned long>(k));
    return Rational(b);
}

/// Falling factorial n(n-1)...(n-k+1).
inline Rational falling(const Rational& n, long k) {
    Rational acc = 1;
    for (long j = 0; j < k; ++j) acc *= n - j;
    return acc;
}

/// Pochhammer (rising factorial) (x)_k = x(x+1)...(x+k-1) = Gamma(x+k)/Gamma(x).
/// Gamma ratios are always computed this way, never through floating point.
inline Rational pochhammer(const Rational& x, long k) {
    Rational acc = 1;
    for (long j = 0; j < k; ++j) acc *= x + j;
    return acc;
}

inline Rational abs_rat(const Rational& r) { return r < 0 ? Rational(-r) : r; }

}  // namespace facdual

#endif
