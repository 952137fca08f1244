// Single-site duality function families, factorized assembly, and the two
// recovery mechanisms (Taylor coefficients of theta^k Z, inverse Laplace).
#ifndef FACDUAL_DUALITY_HPP
#define FACDUAL_DUALITY_HPP

#include <functional>
#include <stdexcept>

#include "facdual/interval.hpp"
#include "facdual/measures.hpp"
#include "facdual/poly.hpp"
#include "facdual/systems.hpp"

namespace facdual {

namespace detail {
inline void check_range(const ParticleSystem& sys, long k, long n) {
    if (!sys.in_state_space(k) || !sys.in_state_space(n))
        throw std::domain_error("duality argument outside the state space");
}
}  // namespace detail

/// Classical single-site self-duality
///   d(k,n) = n!/(n-k)! * b^k * prod_{j<k} sigma*beta/(sigma*beta + j) * 1{k<=n}
/// with the conventional scale b = 1/beta (b = 1 for IRW), giving
/// n!/(n-k)!, Gamma(a)/Gamma(a+k) n!/(n-k)!, (g-k)!/g! n!/(n-k)!.
inline Rational classical_d(const ParticleSystem& sys, long k, long n) {
    detail::check_range(sys, k, n);
    if (k > n) return 0;
    Rational d = falling(n, k);
    if (sys.sigma() != 0) {
        Rational sb = sys.sigma() * sys.beta();
        d *= pow_rat(sys.sigma(), k) / pochhammer(sb, k);  // (b*sb)^k/(sb)_k, b=1/beta
    }
    return d;
}

/// Scaled classical form d(k,n) = n!/(n-k)! (b sb)^k / (sb)_k  (b^k for IRW).
inline Rational classical_d_scaled(const ParticleSystem& sys, const Rational& b, long k, long n) {
    detail::check_range(sys, k, n);
    if (k > n) return 0;
    Rational d = falling(n, k) * pow_rat(b, k);
    if (sys.sigma() != 0) {
        Rational sb = sys.sigma() * sys.beta();
        d *= pow_rat(sb, k) / pochhammer(sb, k);
    }
    return d;
}

/// Terminating hypergeometric-sum route for the orthogonal families:
///   sigma = 0:  a^k sum_r C(n,r) C(k,r) r! (b/a)^r
///   sigma != 0: a^k sum_r (-n)_r (-k)_r / ((sb)_r r!) (b sb / a)^r
/// The a = 0 limit is the scaled classical branch.
inline Rational orthogonal_d(const ParticleSystem& sys, const Rational& a, const Rational& b,
                             long k, long n) {
    if (b == 0) throw std::invalid_argument("orthogonal family needs b != 0");
    detail::check_range(sys, k, n);
    if (a == 0) return classical_d_scaled(sys, b, k, n);
    long rmax = std::min(k, n);
    Rational acc = 0;
    if (sys.sigma() == 0) {
        Rational x = b / a;
        for (long r = 0; r <= rmax; ++r)
            acc += binomial(n, r) * binomial(k, r) * factorial(r) * pow_rat(x, r);
    } else {
        Rational sb = sys.sigma() * sys.beta();
        Rational x = b * sb / a;
        Rational term = 1;
        for (long r = 0;; ++r) {
            acc += term;
            if (r == rmax) break;  // avoid the vanishing (sb + gamma) factor
            // (-n)_{r+1}(-k)_{r+1}/((sb)_{r+1} (r+1)!) x^{r+1}
            term *= Rational(-n + r) * Rational(-k + r) / ((sb + r) * (r + 1)) * x;
        }
    }
    return pow_rat(a, k) * acc;
}

/// Three-term recurrence route through the matching named polynomial family
/// (Charlier / Meixner / Krawtchouk).  Requires a*b < 0 and, for SEP,
/// -a/b <= gamma; throws otherwise.
inline Rational orthogonal_d_recurrence(const ParticleSystem& sys, const Rational& a,
                                        const Rational& b, long k, long n) {
    if (a == 0 || b == 0 || a * b > 0)
        throw std::invalid_argument("named-polynomial route needs a*b < 0");
    detail::check_range(sys, k, n);
    Rational prev = 0, cur = 1;  // p_{-1}, p_0
    if (sys.sigma() == 0) {
        // Charlier C_j(n; mu), mu = -a/b > 0:
        //   mu C_{j+1} = (j + mu - n) C_j - j C_{j-1}
        Rational mu = -a / b;
        for (long j = 0; j < k; ++j) {
            Rational next = ((j + mu - n) * cur - j * prev) / mu;
            prev = cur;
            cur = next;
        }
    } else if (sys.sigma() > 0) {
        // Meixner M_j(n; beta_M, c), beta_M = sigma*beta, c = a/(a - b*beta_M):
        //   c (j + beta_M) M_{j+1} = [(c-1) n + j + (j + beta_M) c] M_j - j M_{j-1}
        Rational bm = sys.sigma() * sys.beta();
        Rational c = a / (a - b * bm);
        if (c == 0) throw std::invalid_argument("degenerate Meixner parameter");
        for (long j = 0; j < k; ++j) {
            Rational next = (((c - 1) * n + j + (j + bm) * c) * cur - j * prev) / (c * (j + bm));
            prev = cur;
            cur = next;
        }
    } else {
        // Krawtchouk K_j(n; p, N), N = gamma, p = -a/(b*gamma), 0 < p <= 1:
        //   p (N - j) K_{j+1} = [j + p(N - j) - j p - n... ] written from
        //   -n K_j = p(N-j) K_{j+1} - [p(N-j) + j(1-p)] K_j + j(1-p) K_{j-1}
        long N = *sys.cap();
        Rational p = -a / (b * N);
        if (p <= 0 || p > 1)
            throw std::invalid_argument("Krawtchouk route needs 0 < -a/(b*gamma) <= 1");
        for (long j = 0; j < k; ++j) {
            if (j == N) throw std::invalid_argument("Krawtchouk recurrence needs k <= gamma");
            Rational next =
                ((p * (N - j) + j * (1 - p) - n) * cur - j * (1 - p) * prev) / (p * (N - j));
            prev = cur;
            cur = next;
        }
    }
    return pow_rat(a, k) * cur;
}

/// Sum route checked exactly against the recurrence route (the module's
/// internal oracle).  Throws on disagreement.
inline Rational orthogonal_d_checked(const ParticleSystem& sys, const Rational& a,
                                     const Rational& b, long k, long n) {
    Rational s = orthogonal_d(sys, a, b, k, n);
    Rational r = orthogonal_d_recurrence(sys, a, b, k, n);
    if (s != r)
        throw std::logic_error("orthogonal duality routes disagree at k=" + std::to_string(k) +
                               ", n=" + std::to_string(n));
    return s;
}

/// Classical formula extended to every n >= 0, ignoring any cap on the
/// primal variable: the generating-function lifts sum over all of N.
inline Rational classical_d_extended(const ParticleSystem& sys, const Rational& b, long k,
                                     long n) {
    if (!sys.in_state_space(k)) throw std::domain_error("k outside the dual state space");
    if (n < 0 || k > n) return 0;
    Rational d = falling(n, k) * pow_rat(b, k);
    if (sys.sigma() != 0) {
        Rational sb = sys.sigma() * sys.beta();
        d *= pow_rat(sb, k) / pochhammer(sb, k);
    }
    return d;
}

/// Orthogonal formula extended to every n >= 0 (same sum, no cap on n).
inline Rational orthogonal_d_extended(const ParticleSystem& sys, const Rational& a,
                                      const Rational& b, long k, long n) {
    if (b == 0) throw std::invalid_argument("orthogonal family needs b != 0");
    if (!sys.in_state_space(k)) throw std::domain_error("k outside the dual state space");
    if (a == 0) return classical_d_extended(sys, b, k, n);
    long rmax = std::min(k, n);
    Rational acc = 0;
    if (sys.sigma() == 0) {
        Rational x = b / a;
        for (long r = 0; r <= rmax; ++r)
            acc += binomial(n, r) * binomial(k, r) * factorial(r) * pow_rat(x, r);
    } else {
        Rational sb = sys.sigma() * sys.beta();
        Rational x = b * sb / a;
        Rational term = 1;
        for (long r = 0;; ++r) {
            acc += term;
            if (r == rmax) break;  // avoid the vanishing (sb + gamma) factor
            term *= Rational(-n + r) * Rational(-k + r) / ((sb + r) * (r + 1)) * x;
        }
    }
    return pow_rat(a, k) * acc;
}

/// Cheap (diagonal) self-duality in reduced single-site form
///   d(k,n) = 1{k=n} k! / (phi(k) lambda^k),
/// i.e. 1/nu_lambda(k) with the constant Z_lambda factor dropped; the factor
/// depends only on lambda and cancels in every duality identity.  The full
/// table normalization is available via cheap_normalization.
inline Rational cheap_d(const ParticleSystem& sys, const Rational& lambda, long k, long n) {
    MarginalFamily fam(sys);
    fam.require_admissible(lambda);
    detail::check_range(sys, k, n);
    if (k != n) return 0;
    return factorial(k) / (fam.phi(k) * pow_rat(lambda, k));
}

/// Certified bracket of Z_lambda, the constant omitted from cheap_d.
inline Bracket cheap_normalization(const ParticleSystem& sys, const Rational& lambda) {
    return MarginalFamily(sys).partition_Z(lambda);
}

/// Trivial self-duality a^k (constant in n): conservation of dual particles.
inline Rational trivial_d(const Rational& a, long k, long /*n*/) { return pow_rat(a, k); }

/// Termwise-absolute majorant of the orthogonal sum.  Satisfies
///   dabs(k, n+1) <= (n+1)/(n+1-k) dabs(k, n)  for n >= k,
/// since every summand carries a factor falling(n, r) with r <= k; used for
/// certified tail bounds of stationary moments.
inline Rational orthogonal_d_abs(const ParticleSystem& sys, const Rational& a, const Rational& b,
                                 long k, long n) {
    if (a == 0) return abs_rat(classical_d_extended(sys, abs_rat(b), k, n));
    long rmax = std::min(k, n);
    Rational acc = 0;
    if (sys.sigma() == 0) {
        Rational x = abs_rat(b / a);
        for (long r = 0; r <= rmax; ++r)
            acc += binomial(n, r) * binomial(k, r) * factorial(r) * pow_rat(x, r);
    } else {
        Rational sb = sys.sigma() * sys.beta();
        Rational x = abs_rat(b * sb / a);
        for (long r = 0; r <= rmax; ++r)
            acc += abs_rat(pochhammer(Rational(-k), r) / (pochhammer(sb, r) * factorial(r))) *
                   falling(n, r) * pow_rat(x, r);
    }
    return abs_rat(pow_rat(a, k)) * acc;
}

/// Truncated power series of theta(lambda) = a + b*beta*lambda/(1-sigma*lambda).
inline Poly theta_series_poly(const ParticleSystem& sys, const Rational& a, const Rational& b,
                              long order) {
    std::vector<Rational> c(order + 1, 0);
    c[0] = a;
    Rational geom = 1;
    for (long j = 1; j <= order; ++j) {
        c[j] = b * sys.beta() * geom;
        geom *= sys.sigma();
    }
    return univariate_from_coeffs(c);
}

/// Truncated power series of Z_lambda = sum phi(n) lambda^n / n!.
inline Poly partition_series_poly(const ParticleSystem& sys, long order) {
    MarginalFamily fam(sys);
    std::vector<Rational> c;
    for (long n = 0; n <= order; ++n) {
        if (sys.cap() && n > *sys.cap()) {
            c.push_back(0);
            continue;
        }
        c.push_back(fam.phi(n) / factorial(n));
    }
    return univariate_from_coeffs(c);
}

/// Recovery of d(k,n) as the n-th Taylor coefficient of theta(lambda)^k
/// Z_lambda, times n!/phi(n).
inline Rational recover_d_from_theta(const ParticleSystem& sys, const Rational& a,
                                     const Rational& b, long k, long n) {
    detail::check_range(sys, k, n);
    MarginalFamily fam(sys);
    Rational phin = fam.phi(n);
    if (phin <= 0) throw std::domain_error("recovery needs phi(n) > 0");
    Poly theta = theta_series_poly(sys, a, b, n);
    Poly z = partition_series_poly(sys, n);
    Poly prod = (univariate_pow(theta, k, n) * z).truncated(n);
    return factorial(n) / phin * univariate_coeff(prod, static_cast<unsigned>(n));
}

/// Discrete-continuum single-site duality d(k,z) as an exact polynomial in z
/// (variable index 0):
///   sigma = 0:          (a + b z)^k
///   sigma != 0, a = 0:  (b sb)^k / (sb)_k * z^k
///   sigma != 0, a != 0: a^k 1F1(-k; sb; -(b sb / a) z)   (terminating)
inline Poly continuum_d(const ParticleSystem& sys, const Rational& a, const Rational& b, long k) {
    if (!sys.in_state_space(k)) throw std::domain_error("k outside the dual state space");
    Poly z = Poly::variable(1, 0);
    if (sys.sigma() == 0) {
        Poly base = Poly::constant(1, a) + z * b;
        Poly acc = Poly::constant(1, 1);
        for (long j = 0; j < k; ++j) acc = acc * base;
        return acc;
    }
    Rational sb = sys.sigma() * sys.beta();
    if (a == 0)
        return Poly::monomial({static_cast<unsigned>(k)}, pow_rat(b * sb, k) / pochhammer(sb, k));
    Poly acc(1);
    Rational coeff = pow_rat(a, k);
    Rational x = -(b * sb / a);
    Rational term = 1;
    for (long j = 0;; ++j) {
        acc.add_term({static_cast<unsigned>(j)}, coeff * term);
        if (j == k) break;  // avoid the vanishing (sb + gamma) factor
        term *= Rational(-k + j) / ((sb + j) * (j + 1)) * x;
    }
    return acc;
}

/// Inverse-Laplace recovery of the SIP/BEP duality polynomial:
/// (a lambda + b alpha)^k lambda^{-alpha-k} inverted term by term and divided
/// by z^{alpha-1}/Gamma(alpha):
///   d(k,z) = sum_j C(k,j) a^j (b alpha)^{k-j} z^{k-j} / (alpha)_{k-j}.
inline Poly laplace_recover(const Rational& alpha, const Rational& a, const Rational& b, long k) {
    if (alpha <= 0) throw std::invalid_argument("laplace_recover needs alpha > 0");
    Poly out(1);
    for (long j = 0; j <= k; ++j) {
        Rational c = binomial(k, j) * pow_rat(a, j) * pow_rat(b * alpha, k - j) /
                     pochhammer(alpha, k - j);
        out.add_term({static_cast<unsigned>(k - j)}, c);
    }
    return out;
}

/// Continuum-continuum single-site self-duality families d(v,z):
///   Exponential:  e^{c v z}                       (operator sigma = 0)
///   Confluent:    0F1(-; alpha; c v z)            (sigma = +1)
///   TruncatedSep: 0F1(-; -gamma; c v z)|_{j<=gamma}  (sigma = -1)
/// The SEP series is read as the finite sum over j = 0..gamma; later terms
/// have vanishing Pochhammer denominators.
enum class ContinuumFamily { Exponential, Confluent, TruncatedSep };

/// Series in variables (v, z) = (var_v, var_z) of an nvars-variable ring.
inline TruncatedSeries continuum_selfduality_series(ContinuumFamily family, const Rational& param,
                                                    const Rational& c, int nvars, int var_v,
                                                    int var_z, long order) {
    Poly acc(nvars);
    long jmax = order / 2;
    if (family == ContinuumFamily::TruncatedSep) {
        if (param <= 0 || param.get_den() != 1)
            throw std::invalid_argument("TruncatedSep needs a positive integer gamma");
        jmax = std::min(jmax, param.get_num().get_si());
    }
    Rational coeff = 1;
    for (long j = 0; j <= jmax; ++j) {
        Monomial m(nvars, 0u);
        m[var_v] = m[var_z] = static_cast<unsigned>(j);
        acc.add_term(m, coeff);
        Rational denom = Rational(j + 1);
        switch (family) {
            case ContinuumFamily::Exponential: break;
            case ContinuumFamily::Confluent: denom *= param + j; break;
            case ContinuumFamily::TruncatedSep: denom *= -param + j; break;
        }
        if (denom == 0) break;  // past the SEP truncation point
        coeff *= c / denom;
    }
    return TruncatedSeries(acc, order);
}

/// Pointwise evaluation of d(v,z), certified by the series order.
inline Bracket selfdual_continuum_d(ContinuumFamily family, const Rational& param,
                                    const Rational& c, const Rational& v, const Rational& z,
                                    long order) {
    if (order < 4) throw std::invalid_argument("order too small for certification");
    TruncatedSeries s = continuum_selfduality_series(family, param, c, 2, 0, 1, order);
    Rational value = s.poly().evaluate({v, z});
    if (family == ContinuumFamily::TruncatedSep) return {value};  // finite sum, exact
    // tail: sum_{j>jmax} |c v z|^j / j! <= first neglected term * 2 once the
    // term ratio is below 1/2
    Rational x = abs_rat(c * v * z);
    long jmax = order / 2;
    Rational term = pow_rat(x, jmax + 1) / factorial(jmax + 1);
    if (family == ContinuumFamily::Confluent) term /= abs_rat(pochhammer(param, jmax + 1));
    Rational ratio = x / (jmax + 2);
    if (ratio >= Rational(1, 2))
        throw std::invalid_argument("order too small for certification at this (v,z)");
    Rational tail = 2 * term;
    return {value - tail, value + tail};
}

/// Discrete-discrete single-site duality evaluator with its family tag.
class SingleSiteDuality {
  public:
    enum class Kind { Classical, Orthogonal, Cheap, Trivial };

    static SingleSiteDuality classical(const ParticleSystem& sys) {
        SingleSiteDuality d{Kind::Classical,
                            [sys](long k, long n) { return classical_d(sys, k, n); }};
        // conventional scale: b = 1/beta for sigma != 0, b = 1 for IRW
        d.a_ = 0;
        d.b_ = sys.sigma() == 0 ? Rational(1) : 1 / sys.beta();
        return d;
    }
    static SingleSiteDuality orthogonal(const ParticleSystem& sys, const Rational& a,
                                        const Rational& b) {
        SingleSiteDuality d{Kind::Orthogonal,
                            [sys, a, b](long k, long n) { return orthogonal_d(sys, a, b, k, n); }};
        d.a_ = a;
        d.b_ = b;
        return d;
    }
    static SingleSiteDuality cheap(const ParticleSystem& sys, const Rational& lambda) {
        SingleSiteDuality d{Kind::Cheap,
                            [sys, lambda](long k, long n) { return cheap_d(sys, lambda, k, n); }};
        d.lambda_ = lambda;
        return d;
    }
    static SingleSiteDuality trivial(const Rational& a) {
        SingleSiteDuality d{Kind::Trivial, [a](long k, long n) { return trivial_d(a, k, n); }};
        d.a_ = a;
        return d;
    }
    static SingleSiteDuality custom(Kind kind, std::function<Rational(long, long)> eval) {
        return {kind, std::move(eval)};
    }

    Kind kind() const { return kind_; }
    const Rational& a() const { return a_; }
    const Rational& b() const { return b_; }
    const Rational& lambda() const { return lambda_; }
    Rational operator()(long k, long n) const { return eval_(k, n); }

  private:
    SingleSiteDuality(Kind kind, std::function<Rational(long, long)> eval)
        : kind_(kind), eval_(std::move(eval)) {}

    Kind kind_;
    Rational a_ = 0, b_ = 0, lambda_ = 0;
    std::function<Rational(long, long)> eval_;
};

/// D(xi, eta) = prod_x d(xi_x, eta_x).
inline Rational factorized_D(const SingleSiteDuality& d, const Configuration& xi,
                             const Configuration& eta) {
    if (xi.size() != eta.size())
        throw std::invalid_argument("factorized_D: configuration size mismatch");
    Rational acc = 1;
    for (size_t x = 0; x < xi.size(); ++x) acc *= d(xi[x], eta[x]);
    return acc;
}

/// Mixed D(xi, z) = prod_x d(xi_x, z_x) as a polynomial in the site
/// variables, with per-site polynomials d(k, .) supplied by `site`.
inline Poly factorized_D_poly(const std::function<Poly(long)>& site, const Configuration& xi) {
    int n = static_cast<int>(xi.size());
    Poly acc = Poly::constant(n, 1);
    for (int x = 0; x < n; ++x) {
        Poly dx = site(xi[x]);  // univariate in z
        Poly lifted(n);
        for (const auto& [m, c] : dx.terms()) {
            Monomial mm(n, 0u);
            mm[x] = m[0];
            lifted.add_term(mm, c);
        }
        acc = acc * lifted;
    }
    return acc;
}

}  // namespace facdual

#endif
