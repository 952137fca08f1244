// Generating-function operators G, Gbar, H, Hbar, A, their identities, and
// duality lifting between the discrete and continuum signatures.
#ifndef FACDUAL_INTERTWINE_HPP
#define FACDUAL_INTERTWINE_HPP

#include <functional>
#include <map>
#include <set>
#include <stdexcept>

#include "facdual/duality.hpp"
#include "facdual/poly.hpp"
#include "facdual/systems.hpp"

namespace facdual {

/// Finitely supported rational-valued function on configurations.
class FinSupportFn {
  public:
    explicit FinSupportFn(int sites) : sites_(sites) {
        if (sites < 1) throw std::invalid_argument("FinSupportFn needs at least one site");
    }

    static FinSupportFn delta(const Configuration& at) {
        FinSupportFn f(static_cast<int>(at.size()));
        f.set(at, 1);
        return f;
    }

    int sites() const { return sites_; }
    const std::map<Configuration, Rational>& support() const { return values_; }
    bool is_zero() const { return values_.empty(); }

    void set(const Configuration& c, const Rational& v) {
        check(c);
        if (v == 0)
            values_.erase(c);
        else
            values_[c] = v;
    }

    Rational value(const Configuration& c) const {
        check(c);
        auto it = values_.find(c);
        return it == values_.end() ? Rational(0) : it->second;
    }

    bool operator==(const FinSupportFn& o) const {
        return sites_ == o.sites_ && values_ == o.values_;
    }

  private:
    void check(const Configuration& c) const {
        if (static_cast<int>(c.size()) != sites_)
            throw std::invalid_argument("configuration size mismatch");
        for (long n : c)
            if (n < 0) throw std::invalid_argument("negative occupation");
    }

    int sites_;
    std::map<Configuration, Rational> values_;
};

namespace detail {
/// Truncated series of e^{s * z_var} in an nvars-variable ring.
inline Poly exp_series(int nvars, int var, const Rational& s, long order) {
    Poly p(nvars);
    Rational c = 1;
    for (long j = 0; j <= order; ++j) {
        Monomial m(nvars, 0u);
        m[var] = static_cast<unsigned>(j);
        p.add_term(m, c);
        c *= s / (j + 1);
    }
    return p;
}
}  // namespace detail

/// Gbar f(z) = sum_eta f(eta) prod_x z_x^{eta_x} / eta_x!  (exact polynomial).
inline Poly Gbar_apply(const FinSupportFn& f) {
    Poly out(f.sites());
    for (const auto& [eta, val] : f.support()) {
        Rational c = val;
        Monomial m(f.sites());
        for (int x = 0; x < f.sites(); ++x) {
            m[x] = static_cast<unsigned>(eta[x]);
            c /= factorial(eta[x]);
        }
        out.add_term(m, c);
    }
    return out;
}

/// G f = e^{-|z|} Gbar f; the polynomial part plus the conjugation marker.
struct GImage {
    Poly polynomial;        // Gbar f
    bool exp_conjugation;   // true: an implicit factor e^{-sum_x z_x}
};

inline GImage G_apply(const FinSupportFn& f) { return {Gbar_apply(f), true}; }

/// Hbar g(eta) = prod_x eta_x! * [z^eta] g: exact inverse of Gbar, finitely
/// supported for polynomial g.
inline FinSupportFn Hbar_apply(const Poly& g) {
    FinSupportFn out(g.nvars());
    for (const auto& [m, c] : g.terms()) {
        Configuration eta(m.begin(), m.end());
        Rational v = c;
        for (unsigned e : m) v *= factorial(e);
        out.set(eta, v);
    }
    return out;
}

/// Binomial transform A f(eta) = sum_{k <= eta} prod_x C(eta_x, k_x) f(k).
inline Rational A_value(const FinSupportFn& f, const Configuration& eta) {
    if (static_cast<int>(eta.size()) != f.sites())
        throw std::invalid_argument("configuration size mismatch");
    Rational acc = 0;
    for (const auto& [k, val] : f.support()) {
        Rational w = val;
        for (int x = 0; x < f.sites(); ++x) {
            w *= binomial(eta[x], k[x]);
            if (w == 0) break;
        }
        acc += w;
    }
    return acc;
}

/// A f tabulated on all configurations with total <= max_total.
inline FinSupportFn A_apply(const FinSupportFn& f, long max_total) {
    FinSupportFn out(f.sites());
    for (const auto& eta : enumerate_configurations(f.sites(), max_total))
        out.set(eta, A_value(f, eta));
    return out;
}

/// H g(eta) = [d^eta/dz^eta]_0 e^{|z|} g(z) = (A Hbar g)(eta); equivalently g
/// with every monomial z^m replaced by the falling factorial (eta)_m.
inline Rational H_value(const Poly& g, const Configuration& eta) {
    if (static_cast<int>(eta.size()) != g.nvars())
        throw std::invalid_argument("configuration size mismatch");
    Rational acc = 0;
    for (const auto& [m, c] : g.terms()) {
        Rational t = c;
        for (int x = 0; x < g.nvars(); ++x) {
            t *= falling(eta[x], m[x]);
            if (t == 0) break;
        }
        acc += t;
    }
    return acc;
}

/// Generator applied to a finitely supported function, returned with finite
/// support (the one-jump neighborhood of supp f).
inline FinSupportFn apply_generator_fn(const ParticleSystem& sys, const RateKernel& kernel,
                                       const FinSupportFn& f) {
    std::set<Configuration> domain;
    for (const auto& [eta, val] : f.support()) {
        if (!sys.valid_configuration(eta))
            throw std::invalid_argument("support outside the state space");
        domain.insert(eta);
        for (const auto& [x, y] : kernel.edges()) {
            if (eta[x] > 0) {
                Configuration m = moved(eta, x, y);
                if (sys.valid_configuration(m)) domain.insert(std::move(m));
            }
            if (eta[y] > 0) {
                Configuration m = moved(eta, y, x);
                if (sys.valid_configuration(m)) domain.insert(std::move(m));
            }
        }
    }
    ConfigFn lookup = [&f](const Configuration& c) { return f.value(c); };
    FinSupportFn out(f.sites());
    for (const auto& eta : domain) out.set(eta, apply_generator(sys, kernel, lookup, eta));
    return out;
}

/// Formal generator on all of N^V: rates u(n) v(m) taken from the rate
/// formulas with no occupation cap.  For sigma = -1 the rate v(n) = beta - n
/// goes negative past the cap, so this is not a Markov generator there, but
/// it is the operator the generating-function intertwining holds for: Gbar
/// sums over every lattice point, and jumps that land past the cap carry
/// coefficients that only cancel against the formal rates.
inline FinSupportFn apply_generator_formal_fn(const ParticleSystem& sys, const RateKernel& kernel,
                                              const FinSupportFn& f) {
    std::set<Configuration> domain;
    for (const auto& [eta, val] : f.support()) {
        if (!sys.valid_configuration(eta))
            throw std::invalid_argument("support outside the state space");
        domain.insert(eta);
        for (const auto& [x, y] : kernel.edges()) {
            if (eta[x] > 0) domain.insert(moved(eta, x, y));
            if (eta[y] > 0) domain.insert(moved(eta, y, x));
        }
    }
    FinSupportFn out(f.sites());
    for (const auto& eta : domain) {
        Rational feta = f.value(eta);
        Rational acc = 0;
        for (const auto& [x, y] : kernel.edges()) {
            Rational q = kernel.symmetrized(x, y);
            if (eta[x] > 0) {
                Rational r = sys.u(eta[x]) * sys.v(eta[y]);
                if (r != 0) acc += q * r * (f.value(moved(eta, x, y)) - feta);
            }
            if (eta[y] > 0) {
                Rational r = sys.u(eta[y]) * sys.v(eta[x]);
                if (r != 0) acc += q * r * (f.value(moved(eta, y, x)) - feta);
            }
        }
        out.set(eta, acc);
    }
    return out;
}

/// Residual of the forward intertwining on polynomials,
///   caL^{sigma,beta} (Gbar f) - Gbar (L^{sigma,beta} f),
/// exact; the e^{-|z|} conjugation commutes with (d_x - d_y) and is dropped.
/// The discrete operator is the formal one: for capped systems the relation
/// needs the rate formulas extended past the cap (a function supported at the
/// cap has caL Gbar f != 0 even though the capped generator kills f).
/// `dsys_override` substitutes a different continuum operator (mutation
/// testing); by default the operator matched to the particle system is used.
inline Poly check_intertwining(const ParticleSystem& sys, const RateKernel& kernel,
                               const FinSupportFn& f,
                               std::optional<DiffusionSystem> dsys_override = std::nullopt) {
    DiffusionSystem dsys = dsys_override.value_or(DiffusionSystem{sys.sigma(), sys.beta()});
    Poly lhs = apply_diffusion_operator(dsys, kernel, Gbar_apply(f));
    Poly rhs = Gbar_apply(apply_generator_formal_fn(sys, kernel, f));
    return lhs - rhs;
}

inline Poly check_intertwining(const Rational& sigma, const Rational& beta,
                               const RateKernel& kernel, const FinSupportFn& f) {
    return check_intertwining(ParticleSystem::sigma_beta(sigma, beta), kernel, f);
}

/// Residual of the inverse intertwining,
///   L^{sigma,beta} (H g) - H (caL^{sigma,beta} g),
/// tabulated on all configurations with total <= max_total.  With
/// use_unnormalized the check runs on Hbar instead of H = A Hbar.
inline FinSupportFn check_inverse_intertwining(const ParticleSystem& sys, const RateKernel& kernel,
                                               const Poly& g, long max_total,
                                               bool use_unnormalized = false) {
    if (g.nvars() != kernel.size())
        throw std::invalid_argument("polynomial variable count does not match kernel");
    Poly lg = apply_diffusion_operator(DiffusionSystem{sys.sigma(), sys.beta()}, kernel, g);
    FinSupportFn hbar_g = Hbar_apply(g);
    FinSupportFn hbar_lg = Hbar_apply(lg);
    auto h = [&](const FinSupportFn& hb, const Configuration& eta) {
        return use_unnormalized ? hb.value(eta) : A_value(hb, eta);
    };
    ConfigFn hg = [&](const Configuration& eta) { return h(hbar_g, eta); };
    FinSupportFn out(kernel.size());
    for (const auto& eta : enumerate_configurations(kernel.size(), max_total, sys.cap())) {
        Rational lhs = apply_generator(sys, kernel, hg, eta);
        out.set(eta, lhs - h(hbar_lg, eta));
    }
    return out;
}

inline FinSupportFn check_inverse_intertwining(const Rational& sigma, const Rational& beta,
                                               const RateKernel& kernel, const Poly& g,
                                               long max_total) {
    return check_inverse_intertwining(ParticleSystem::sigma_beta(sigma, beta), kernel, g,
                                      max_total);
}

/// Right-lift of a single-site duality: Gbar applied in the primal variable,
///   d(k, z) = sum_n d(k, n) z^n / n!,
/// certified through `order` and required to be a polynomial of degree <=
/// degree_cap after multiplication by e^{-z}.  The evaluator must give the
/// formula value for every n >= 0 (no cap), matching the lift's full sum.
/// The returned polynomial carries an implicit e^{-z} factor.
inline Poly lift_duality_right(const std::function<Rational(long, long)>& d, long k,
                               long degree_cap, long order) {
    if (order <= degree_cap)
        throw std::invalid_argument("lift order must exceed the expected degree");
    Poly series(1);
    for (long n = 0; n <= order; ++n) series.add_term({static_cast<unsigned>(n)}, d(k, n) / factorial(n));
    Poly prod = (series * detail::exp_series(1, 0, -1, order)).truncated(order);
    for (const auto& [m, c] : prod.terms())
        if (static_cast<long>(m[0]) > degree_cap)
            throw std::runtime_error("right-lift not certifiably polynomial at this order");
    return prod;
}

/// Left-lift of a mixed duality: Gbar applied in the dual variable,
///   d(v, z) = sum_k d(k, z) v^k / k!,
/// as a truncated series in (v, z) (variables 0 and 1), exact through
/// `order`.  An implicit e^{-v} factor completes the G-lift; callers multiply
/// it in explicitly when comparing against closed forms.
inline TruncatedSeries lift_duality_left(const std::function<Poly(long)>& site_poly, long order) {
    Poly acc(2);
    for (long k = 0; k <= order; ++k) {
        Poly dk = site_poly(k);  // univariate in z
        Rational kf = factorial(k);
        for (const auto& [m, c] : dk.terms())
            acc.add_term({static_cast<unsigned>(k), m[0]}, c / kf);
    }
    return TruncatedSeries(acc, order);
}

}  // namespace facdual

#endif
