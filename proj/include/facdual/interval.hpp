// Certified rational brackets for truncated infinite sums.
#ifndef FACDUAL_INTERVAL_HPP
#define FACDUAL_INTERVAL_HPP

#include <stdexcept>

#include "facdual/rational.hpp"

namespace facdual {

/// Closed interval [lo, hi] with exact rational endpoints.  A bracket is
/// "exact" when lo == hi (finite sums, closed forms).
struct Bracket {
    Rational lo = 0;
    Rational hi = 0;

    Bracket() = default;
    Bracket(Rational v) : lo(v), hi(std::move(v)) {}
    Bracket(Rational l, Rational h) : lo(std::move(l)), hi(std::move(h)) {
        if (lo > hi) throw std::invalid_argument("bracket with lo > hi");
    }

    bool exact() const { return lo == hi; }
    Rational width() const { return hi - lo; }
    bool contains(const Rational& v) const { return lo <= v && v <= hi; }
    bool contains(const Bracket& b) const { return lo <= b.lo && b.hi <= hi; }
    bool contains_double(double v) const { return to_double(lo) <= v && v <= to_double(hi); }
    double mid() const { return (to_double(lo) + to_double(hi)) / 2.0; }
};

inline Bracket operator+(const Bracket& a, const Bracket& b) {
    return {a.lo + b.lo, a.hi + b.hi};
}

inline Bracket operator-(const Bracket& a, const Bracket& b) {
    return {a.lo - b.hi, a.hi - b.lo};
}

inline Bracket operator*(const Bracket& a, const Bracket& b) {
    Rational c[4] = {a.lo * b.lo, a.lo * b.hi, a.hi * b.lo, a.hi * b.hi};
    Rational lo = c[0], hi = c[0];
    for (int i = 1; i < 4; ++i) {
        if (c[i] < lo) lo = c[i];
        if (c[i] > hi) hi = c[i];
    }
    return {lo, hi};
}

inline Bracket operator/(const Bracket& a, const Bracket& b) {
    if (b.contains(0)) throw std::domain_error("bracket division through zero");
    Rational c[4] = {a.lo / b.lo, a.lo / b.hi, a.hi / b.lo, a.hi / b.hi};
    Rational lo = c[0], hi = c[0];
    for (int i = 1; i < 4; ++i) {
        if (c[i] < lo) lo = c[i];
        if (c[i] > hi) hi = c[i];
    }
    return {lo, hi};
}

inline Bracket pow_bracket(const Bracket& a, long e) {
    Bracket acc{Rational(1)};
    for (long i = 0; i < e; ++i) acc = acc * a;
    return acc;
}

}  // namespace facdual

#endif
