// Sparse multivariate polynomials and truncated power series with exact
// rational coefficients.
#ifndef FACDUAL_POLY_HPP
#define FACDUAL_POLY_HPP

#include <algorithm>
#include <map>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "facdual/rational.hpp"

namespace facdual {

using Monomial = std::vector<unsigned>;

inline unsigned total_degree(const Monomial& m) {
    return std::accumulate(m.begin(), m.end(), 0u);
}

/// Sparse polynomial in a fixed number of variables.  Zero coefficients are
/// never stored.
class Poly {
  public:
    explicit Poly(int nvars = 1) : nvars_(nvars) {}

    static Poly constant(int nvars, const Rational& c) {
        Poly p(nvars);
        if (c != 0) p.terms_[Monomial(nvars, 0u)] = c;
        return p;
    }

    static Poly variable(int nvars, int i) {
        Poly p(nvars);
        Monomial m(nvars, 0u);
        m.at(i) = 1;
        p.terms_[m] = 1;
        return p;
    }

    static Poly monomial(const Monomial& m, const Rational& c) {
        Poly p(static_cast<int>(m.size()));
        if (c != 0) p.terms_[m] = c;
        return p;
    }

    int nvars() const { return nvars_; }
    bool is_zero() const { return terms_.empty(); }
    const std::map<Monomial, Rational>& terms() const { return terms_; }

    long degree() const {  // total degree; -1 for the zero polynomial
        long d = -1;
        for (const auto& [m, c] : terms_) d = std::max<long>(d, total_degree(m));
        return d;
    }

    Rational coeff(const Monomial& m) const {
        auto it = terms_.find(m);
        return it == terms_.end() ? Rational(0) : it->second;
    }

    void add_term(const Monomial& m, const Rational& c) {
        if (c == 0) return;
        auto [it, fresh] = terms_.emplace(m, c);
        if (!fresh) {
            it->second += c;
            if (it->second == 0) terms_.erase(it);
        }
    }

    Poly& operator+=(const Poly& o) {
        check_vars(o);
        for (const auto& [m, c] : o.terms_) add_term(m, c);
        return *this;
    }
    Poly& operator-=(const Poly& o) {
        check_vars(o);
        for (const auto& [m, c] : o.terms_) add_term(m, -c);
        return *this;
    }
    Poly& operator*=(const Rational& s) {
        if (s == 0) {
            terms_.clear();
            return *this;
        }
        for (auto& [m, c] : terms_) c *= s;
        return *this;
    }

    friend Poly operator+(Poly a, const Poly& b) { return a += b; }
    friend Poly operator-(Poly a, const Poly& b) { return a -= b; }
    friend Poly operator*(Poly a, const Rational& s) { return a *= s; }
    friend Poly operator*(const Rational& s, Poly a) { return a *= s; }

    friend Poly operator*(const Poly& a, const Poly& b) {
        a.check_vars(b);
        Poly out(a.nvars_);
        Monomial m(a.nvars_);
        for (const auto& [ma, ca] : a.terms_)
            for (const auto& [mb, cb] : b.terms_) {
                for (int i = 0; i < a.nvars_; ++i) m[i] = ma[i] + mb[i];
                out.add_term(m, ca * cb);
            }
        return out;
    }

    bool operator==(const Poly& o) const { return nvars_ == o.nvars_ && terms_ == o.terms_; }

    Poly derivative(int var) const {
        Poly out(nvars_);
        for (const auto& [m, c] : terms_) {
            if (m[var] == 0) continue;
            Monomial d = m;
            d[var] -= 1;
            out.add_term(d, c * m[var]);
        }
        return out;
    }

    Rational evaluate(const std::vector<Rational>& point) const {
        if (static_cast<int>(point.size()) != nvars_)
            throw std::invalid_argument("evaluate: wrong point dimension");
        Rational acc = 0;
        for (const auto& [m, c] : terms_) {
            Rational t = c;
            for (int i = 0; i < nvars_; ++i) t *= pow_rat(point[i], m[i]);
            acc += t;
        }
        return acc;
    }

    double evaluate_double(const std::vector<double>& point) const {
        double acc = 0;
        for (const auto& [m, c] : terms_) {
            double t = to_double(c);
            for (int i = 0; i < nvars_; ++i)
                for (unsigned e = 0; e < m[i]; ++e) t *= point[i];
            acc += t;
        }
        return acc;
    }

    /// Drop every term of total degree > cap.
    Poly truncated(long cap) const {
        Poly out(nvars_);
        for (const auto& [m, c] : terms_)
            if (static_cast<long>(total_degree(m)) <= cap) out.terms_[m] = c;
        return out;
    }

    long min_total_degree() const {  // 0 for the zero polynomial
        long d = -1;
        for (const auto& [m, c] : terms_) {
            long t = total_degree(m);
            if (d < 0 || t < d) d = t;
        }
        return d < 0 ? 0 : d;
    }

    std::string str(const std::vector<std::string>& names) const {
        if (terms_.empty()) return "0";
        std::string out;
        for (const auto& [m, c] : terms_) {
            if (!out.empty()) out += " + ";
            out += to_string(c);
            for (int i = 0; i < nvars_; ++i)
                if (m[i] > 0) {
                    out += "*" + names.at(i);
                    if (m[i] > 1) out += "^" + std::to_string(m[i]);
                }
        }
        return out;
    }

  private:
    void check_vars(const Poly& o) const {
        if (nvars_ != o.nvars_) throw std::invalid_argument("polynomial variable count mismatch");
    }

    int nvars_;
    std::map<Monomial, Rational> terms_;
};

/// Polynomial coefficients known to be exact only through a stated total
/// order.  Arithmetic tracks the loss of guaranteed order.
class TruncatedSeries {
  public:
    TruncatedSeries(Poly p, long order) : poly_(p.truncated(order)), order_(order) {
        if (order < 0) throw std::invalid_argument("negative series order");
    }

    static TruncatedSeries from_poly(const Poly& p, long order) { return {p, order}; }

    const Poly& poly() const { return poly_; }
    long order() const { return order_; }
    int nvars() const { return poly_.nvars(); }

    Rational coeff(const Monomial& m) const {
        if (static_cast<long>(total_degree(m)) > order_)
            throw std::out_of_range("coefficient beyond guaranteed order");
        return poly_.coeff(m);
    }

    friend TruncatedSeries operator+(const TruncatedSeries& a, const TruncatedSeries& b) {
        long o = std::min(a.order_, b.order_);
        return {a.poly_ + b.poly_, o};
    }
    friend TruncatedSeries operator-(const TruncatedSeries& a, const TruncatedSeries& b) {
        long o = std::min(a.order_, b.order_);
        return {a.poly_ - b.poly_, o};
    }
    friend TruncatedSeries operator*(const TruncatedSeries& a, const TruncatedSeries& b) {
        long o = std::min(a.order_ + b.poly_.min_total_degree(),
                          b.order_ + a.poly_.min_total_degree());
        return {a.poly_ * b.poly_, o};
    }
    friend TruncatedSeries operator*(const TruncatedSeries& a, const Rational& s) {
        return {a.poly_ * s, a.order_};
    }

    /// Multiplication by an exact polynomial: coefficients through
    /// order + min-degree of the factor stay guaranteed.
    TruncatedSeries mul_exact(const Poly& p) const {
        return {poly_ * p, order_ + p.min_total_degree()};
    }

    TruncatedSeries derivative(int var) const {
        if (order_ == 0) throw std::domain_error("derivative of order-0 series");
        return {poly_.derivative(var), order_ - 1};
    }

    bool guaranteed_zero() const { return poly_.is_zero(); }

  private:
    Poly poly_;
    long order_;
};

// ---- univariate series helpers (variable index 0, nvars = 1) ----

/// Coefficients c_0..c_order of a univariate truncated series.
inline Poly univariate_from_coeffs(const std::vector<Rational>& coeffs) {
    Poly p(1);
    for (unsigned n = 0; n < coeffs.size(); ++n) p.add_term({n}, coeffs[n]);
    return p;
}

inline Rational univariate_coeff(const Poly& p, unsigned n) { return p.coeff({n}); }

/// (series)^k truncated at `order`.
inline Poly univariate_pow(const Poly& base, long k, long order) {
    Poly acc = Poly::constant(1, 1);
    for (long i = 0; i < k; ++i) acc = (acc * base).truncated(order);
    return acc;
}

}  // namespace facdual

#endif
