// Verification engine: exact duality residuals, stochastic checks against a
// sector-exponential oracle, stationary-measure relations, characterization
// of first duality functions, and the exclusion scaling limit.
#ifndef FACDUAL_VERIFY_HPP
#define FACDUAL_VERIFY_HPP

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>

#include "facdual/duality.hpp"
#include "facdual/intertwine.hpp"
#include "facdual/measures.hpp"
#include "facdual/systems.hpp"

namespace facdual {

/// (L_left - L_right) applied to the factorized duality function at (xi,
/// eta): the generator acts once in the dual variable with eta frozen and
/// once in the primal variable with xi frozen.  Exact; zero iff the duality
/// identity holds at this pair.
inline Rational duality_residual_discrete(const ParticleSystem& sys, const RateKernel& kernel,
                                          const SingleSiteDuality& d, const Configuration& xi,
                                          const Configuration& eta) {
    ConfigFn left = [&](const Configuration& x) { return factorized_D(d, x, eta); };
    ConfigFn right = [&](const Configuration& e) { return factorized_D(d, xi, e); };
    return apply_generator(sys, kernel, left, xi) - apply_generator(sys, kernel, right, eta);
}

/// Mixed residual L_left D(., z)|_xi - caL_right D(xi, .) as an exact
/// polynomial in the site variables; the continuum operator is the one
/// matched to the particle system's (sigma, beta).
inline Poly duality_residual_mixed(const ParticleSystem& sys, const RateKernel& kernel,
                                   const std::function<Poly(long)>& site_d,
                                   const Configuration& xi) {
    if (static_cast<int>(xi.size()) != kernel.size())
        throw std::invalid_argument("configuration size does not match kernel");
    if (!sys.valid_configuration(xi))
        throw std::invalid_argument("dual configuration outside the state space");
    Poly d_xi = factorized_D_poly(site_d, xi);
    Poly left(kernel.size());
    for (const auto& [x, y] : kernel.edges()) {
        Rational q = kernel.symmetrized(x, y);
        Rational rxy = sys.u(xi[x]) * sys.v(xi[y]);
        if (rxy != 0) left += (factorized_D_poly(site_d, moved(xi, x, y)) - d_xi) * (q * rxy);
        Rational ryx = sys.u(xi[y]) * sys.v(xi[x]);
        if (ryx != 0) left += (factorized_D_poly(site_d, moved(xi, y, x)) - d_xi) * (q * ryx);
    }
    DiffusionSystem dsys{sys.sigma(), sys.beta()};
    return left - apply_diffusion_operator(dsys, kernel, d_xi);
}

namespace detail {
/// Diffusion operator acting on the variable block [offset, offset + V).
inline Poly apply_diffusion_block(const DiffusionSystem& dsys, const RateKernel& kernel,
                                  const Poly& f, int offset) {
    const int n = f.nvars();
    Poly out(n);
    for (const auto& [x, y] : kernel.edges()) {
        Rational q = kernel.symmetrized(x, y);
        int vx = offset + x, vy = offset + y;
        Poly zx = Poly::variable(n, vx), zy = Poly::variable(n, vy);
        Poly d1 = f.derivative(vx) - f.derivative(vy);
        Poly d2 = d1.derivative(vx) - d1.derivative(vy);
        out += ((zx - zy) * d1 * (-dsys.beta) + (zx * zy) * d2 * dsys.sigma) * q;
    }
    return out;
}
}  // namespace detail

/// caL_left SD - caL_right SD for the factorized continuum self-duality
/// SD(v, z) = prod_x d(v_x, z_x), as a truncated series in the 2V variables
/// (v_1..v_V, z_1..z_V); all guaranteed coefficients (total order <=
/// order - 2) must vanish when the family matches the operator.
///
/// For the degree-capped exclusion family (TruncatedSep with integer cap
/// gamma) the identity holds on the capped coefficient lattice only: every
/// surviving residual term has some single-variable degree > gamma, i.e.
/// lies outside the image of the embedded capped state space, and the full
/// polynomial identity fails (the hypergeometric contiguous relation the
/// sigma = -1 case rests on breaks when the series is cut at the cap).
/// Coefficients past the per-variable cap are therefore dropped; they carry
/// no duality content for the capped system.
inline TruncatedSeries selfduality_residual_continuum(const DiffusionSystem& dsys,
                                                      const RateKernel& kernel,
                                                      ContinuumFamily family,
                                                      const Rational& param, const Rational& c,
                                                      long order) {
    if (order < 4) throw std::invalid_argument("order too low (need >= 4)");
    const int V = kernel.size();
    TruncatedSeries sd =
        continuum_selfduality_series(family, param, c, 2 * V, 0, V, order);
    for (int x = 1; x < V; ++x)
        sd = sd * continuum_selfduality_series(family, param, c, 2 * V, x, V + x, order);
    Poly lhs = detail::apply_diffusion_block(dsys, kernel, sd.poly(), 0);
    Poly rhs = detail::apply_diffusion_block(dsys, kernel, sd.poly(), V);
    Poly diff = lhs - rhs;
    if (family == ContinuumFamily::TruncatedSep) {
        long g = param.get_num().get_si();
        Poly kept(2 * V);
        for (const auto& [m, c] : diff.terms()) {
            bool inside = true;
            for (unsigned e : m)
                if (static_cast<long>(e) > g) { inside = false; break; }
            if (inside) kept.add_term(m, c);
        }
        diff = std::move(kept);
    }
    return TruncatedSeries(diff, sd.order() - 2);
}

/// Exact E_xi [D(xi(t), eta)] by uniformization of the finite sector
/// {|xi| = |xi0|}: e^{Qt} v = e^{-Lt} sum_j (Lt)^j/j! P^j v with P = I + Q/L.
inline double dual_expectation_exact(const ParticleSystem& sys, const RateKernel& kernel,
                                     const SingleSiteDuality& d, const Configuration& xi0,
                                     const Configuration& eta, double t) {
    const int V = kernel.size();
    auto configs = enumerate_configurations_exact(V, total_particles(xi0), sys.cap());
    std::map<Configuration, size_t> index;
    for (size_t i = 0; i < configs.size(); ++i) index[configs[i]] = i;

    const size_t m = configs.size();
    std::vector<std::vector<std::pair<size_t, double>>> jumps(m);
    std::vector<double> out_rate(m, 0.0);
    for (size_t i = 0; i < m; ++i) {
        const Configuration& c = configs[i];
        for (const auto& [x, y] : kernel.edges()) {
            double q = to_double(kernel.symmetrized(x, y));
            auto add = [&](int from, int to) {
                double r = q * to_double(sys.u(c[from]) * sys.v(c[to]));
                if (r <= 0) return;
                Configuration tgt = moved(c, from, to);
                jumps[i].emplace_back(index.at(tgt), r);
                out_rate[i] += r;
            };
            if (c[x] > 0) add(x, y);
            if (c[y] > 0) add(y, x);
        }
    }

    std::vector<double> vcur(m);
    for (size_t i = 0; i < m; ++i) vcur[i] = to_double(factorized_D(d, configs[i], eta));

    double L = 0;
    for (double r : out_rate) L = std::max(L, r);
    if (L == 0 || t == 0) return vcur[index.at(xi0)];
    L *= 1.0625;  // strictly dominate the exit rates

    double lt = L * t;
    double weight = std::exp(-lt);  // Poisson(lt) pmf at j = 0
    double acc_mass = weight;
    std::vector<double> result(m, 0.0), vnext(m);
    for (size_t i = 0; i < m; ++i) result[i] = weight * vcur[i];
    long j = 0;
    while (1.0 - acc_mass > 1e-14) {
        // vnext = P vcur, P = I + Q/L
        for (size_t i = 0; i < m; ++i) {
            double s = (1.0 - out_rate[i] / L) * vcur[i];
            for (const auto& [tgt, r] : jumps[i]) s += (r / L) * vcur[tgt];
            vnext[i] = s;
        }
        vcur.swap(vnext);
        ++j;
        weight *= lt / j;
        acc_mass += weight;
        for (size_t i = 0; i < m; ++i) result[i] += weight * vcur[i];
        if (j > 100000) throw std::runtime_error("uniformization did not converge");
    }
    return result[index.at(xi0)];
}

struct StochasticDualityReport {
    double lhs_mean = 0, lhs_se = 0;  // Monte Carlo E_xi D(xi(t), eta0)
    double rhs_mean = 0, rhs_se = 0;  // Monte Carlo E_eta D(xi0, eta(t))
    double zscore = 0;                // between the two Monte Carlo sides
    double exact_lhs = 0;             // sector-exponential oracle value
    double zscore_vs_exact = 0;       // (rhs_mean - exact_lhs) / rhs_se
    long nsamples = 0;
    std::uint64_t seed = 0;
    std::string rng = "mt19937_64";
};

/// Both sides of the duality relation estimated with `nsamples` paths each
/// (seed-split streams), plus the exact oracle for the dual side.
inline StochasticDualityReport stochastic_duality_check(const ParticleSystem& sys,
                                                        const RateKernel& kernel,
                                                        const SingleSiteDuality& d,
                                                        const Configuration& xi0,
                                                        const Configuration& eta0, double t,
                                                        long nsamples, std::uint64_t seed) {
    if (nsamples < 1) throw std::invalid_argument("need at least one sample");
    StochasticDualityReport rep;
    rep.nsamples = nsamples;
    rep.seed = seed;

    auto run = [&](const Configuration& start, bool dual_side, double& mean, double& se) {
        double s = 0, s2 = 0;
        for (long i = 0; i < nsamples; ++i) {
            std::uint64_t path_seed = seed + 2 * static_cast<std::uint64_t>(i) + (dual_side ? 0 : 1);
            Configuration end = gillespie_simulate(sys, kernel, start, t, path_seed).state;
            double val = dual_side ? to_double(factorized_D(d, end, eta0))
                                   : to_double(factorized_D(d, xi0, end));
            s += val;
            s2 += val * val;
        }
        mean = s / nsamples;
        double var = std::max(0.0, s2 / nsamples - mean * mean);
        se = std::sqrt(var / nsamples);
    };
    run(xi0, true, rep.lhs_mean, rep.lhs_se);
    run(eta0, false, rep.rhs_mean, rep.rhs_se);

    double pooled = std::sqrt(rep.lhs_se * rep.lhs_se + rep.rhs_se * rep.rhs_se);
    double diff = rep.lhs_mean - rep.rhs_mean;
    rep.zscore = pooled > 0 ? diff / pooled : (diff == 0 ? 0 : INFINITY);

    rep.exact_lhs = dual_expectation_exact(sys, kernel, d, xi0, eta0, t);
    double ediff = rep.rhs_mean - rep.exact_lhs;
    rep.zscore_vs_exact = rep.rhs_se > 0 ? ediff / rep.rhs_se : (ediff == 0 ? 0 : INFINITY);
    return rep;
}

struct StationaryCheckResult {
    Bracket moment;    // certified integral of D against the product measure
    Bracket expected;  // theta(lambda)^{|xi|}
    bool pass = false; // brackets overlap
};

/// Certified check of the stationary relation
///   integral D(xi, .) d mu_lambda = theta(lambda)^{|xi|}
/// for the classical, orthogonal and trivial families (those normalized to
/// d(0, .) = 1).  The cheap family integrates to a lambda-dependent constant
/// instead and is rejected.
inline StationaryCheckResult stationary_relation_check(const ParticleSystem& sys,
                                                       const SingleSiteDuality& d,
                                                       const Rational& lambda,
                                                       const Configuration& xi) {
    if (d.kind() == SingleSiteDuality::Kind::Cheap)
        throw std::invalid_argument("cheap family has no theta-form stationary relation");
    if (sys.family() == Family::Custom)
        throw std::invalid_argument("certified moments need a preset system");
    MarginalFamily fam(sys);
    fam.require_admissible(lambda);

    // single-site absolute majorant with the falling-factorial ratio property
    std::function<Rational(long, long)> dabs;
    switch (d.kind()) {
        case SingleSiteDuality::Kind::Classical:
        case SingleSiteDuality::Kind::Trivial:
            dabs = [&d](long k, long n) { return abs_rat(d(k, n)); };
            break;
        case SingleSiteDuality::Kind::Orthogonal:
            dabs = [&sys, &d](long k, long n) {
                return orthogonal_d_abs(sys, d.a(), d.b(), k, n);
            };
            break;
        default:
            throw std::logic_error("unreachable");
    }

    Bracket z = fam.partition_Z(lambda);
    auto site_moment = [&](long k) -> Bracket {
        if (sys.cap()) {
            Rational sum = 0;
            for (long n = 0; n <= *sys.cap(); ++n)
                sum += d(k, n) * fam.unnormalized_weight(lambda, n);
            return Bracket(sum) / z;
        }
        Rational partial = 0, w = 1;  // w = phi(n) lambda^n / n!
        long n = 0;
        const long max_terms = 200000;
        while (true) {
            partial += d(k, n) * w;
            if (n > k) {
                Rational rw = lambda * sys.v(n) / sys.u(n + 1);
                Rational rbar = std::max(rw, Rational(sys.sigma() * lambda));
                Rational rho = Rational(n + 1) / Rational(n + 1 - k) * rbar;
                if (rho < 1) {
                    Rational tail = dabs(k, n) * w * rho / (1 - rho);
                    if (tail * 4096 < kTailThreshold * (abs_rat(partial) + 1))
                        return Bracket(partial - tail, partial + tail) / z;
                }
            }
            if (++n > max_terms) throw std::runtime_error("moment sum did not certify");
            w *= lambda * sys.v(n - 1) / sys.u(n);
        }
    };

    StationaryCheckResult res;
    Bracket prod{Rational(1)};
    for (long k : xi)
        if (k > 0) prod = prod * site_moment(k);
    res.moment = prod;

    Rational theta;
    switch (d.kind()) {
        case SingleSiteDuality::Kind::Trivial: theta = d.a(); break;
        default: theta = fam.theta(d.a(), d.b(), lambda); break;
    }
    res.expected = Bracket(pow_rat(theta, total_particles(xi)));
    res.pass = !(res.moment.hi < res.expected.lo || res.expected.hi < res.moment.lo);
    return res;
}

/// Exact rational basis of the nullspace of an m x n system.
inline std::vector<std::vector<Rational>> nullspace(std::vector<std::vector<Rational>> A,
                                                    size_t ncols) {
    std::vector<long> pivot_col;
    size_t row = 0;
    for (size_t col = 0; col < ncols && row < A.size(); ++col) {
        size_t p = row;
        while (p < A.size() && A[p][col] == 0) ++p;
        if (p == A.size()) continue;
        std::swap(A[row], A[p]);
        Rational inv = 1 / A[row][col];
        for (size_t j = col; j < ncols; ++j) A[row][j] *= inv;
        for (size_t i = 0; i < A.size(); ++i) {
            if (i == row || A[i][col] == 0) continue;
            Rational f = A[i][col];
            for (size_t j = col; j < ncols; ++j) A[i][j] -= f * A[row][j];
        }
        pivot_col.push_back(static_cast<long>(col));
        ++row;
    }
    std::vector<char> is_pivot(ncols, 0);
    for (long c : pivot_col) is_pivot[c] = 1;
    std::vector<std::vector<Rational>> basis;
    for (size_t free_col = 0; free_col < ncols; ++free_col) {
        if (is_pivot[free_col]) continue;
        std::vector<Rational> v(ncols, 0);
        v[free_col] = 1;
        for (size_t r = 0; r < pivot_col.size(); ++r)
            v[pivot_col[r]] = -A[r][free_col];
        basis.push_back(std::move(v));
    }
    return basis;
}

struct SolutionSpace {
    std::vector<std::vector<Rational>> basis;
    long dimension() const { return static_cast<long>(basis.size()); }
};

/// Linear system for the first single-site self-duality function d(1, .) on
/// 0..M, instantiated on every pair (n1, n2) with entries <= M-1: with g =
/// d(1, .), the two-site identity at xi = (1, 0) reads
///   p v(0) [g(n2) - g(n1)] = p u(n1) v(n2) [g(n1-1) - g(n1)]
///                          + p' u(n2) v(n1) [g(n1+1) - g(n1)],
/// with p' = p_ratio * p.  Returns an exact basis of its solution space:
/// dimension 2 (constants plus a nontrivial g) exactly when u(n) = n and v
/// is affine, dimension 1 (constants only) otherwise.
inline SolutionSpace characterize_selfduality(const std::vector<Rational>& u,
                                              const std::vector<Rational>& v,
                                              const Rational& p_ratio = 1) {
    if (u.size() != v.size() || u.size() < 5)
        throw std::invalid_argument("u, v tables must share a length of at least 5 (M >= 4)");
    const long M = static_cast<long>(u.size()) - 1;
    if (u[0] != 0 || u[1] != 1 || v[0] == 0)
        throw std::invalid_argument("tables violate u(0)=0, u(1)=1, v(0)!=0");
    std::vector<std::vector<Rational>> rows;
    for (long n1 = 0; n1 <= M - 1; ++n1)
        for (long n2 = 0; n2 <= M - 1; ++n2) {
            std::vector<Rational> r(M + 1, 0);
            r[n2] += v[0];
            r[n1] -= v[0];
            Rational fwd = u[n1] * v[n2];
            if (n1 >= 1) {
                r[n1 - 1] -= fwd;
                r[n1] += fwd;
            }
            Rational bwd = p_ratio * u[n2] * v[n1];
            r[n1 + 1] -= bwd;
            r[n1] += bwd;
            rows.push_back(std::move(r));
        }
    return {nullspace(std::move(rows), M + 1)};
}

/// Polynomial ansatz for the first duality function d(1, z) of the continuum
/// operator with parameters (1, alpha): the single-edge constraint
///   alpha [g(z2) - g(z1)] + alpha (z1 - z2) g'(z1) - z1 z2 g''(z1) = 0
/// on degree <= M.  Expected basis {1, z}.  drop_transport removes the
/// (z1 - z2) g'(z1) term (mutation control: g = z stops solving and the
/// space collapses to the constants, dimension 1).  Note that dropping the
/// diffusion term instead would leave the space unchanged: the affine
/// solutions are annihilated by g'' regardless, so that mutation is
/// undetectable by dimension.
inline SolutionSpace characterize_continuum_first_dual(const Rational& alpha, long M,
                                                       bool drop_transport = false) {
    if (M < 1) throw std::invalid_argument("degree M must be >= 1");
    if (alpha <= 0) throw std::invalid_argument("alpha must be > 0");
    std::map<Monomial, std::vector<Rational>> rows;  // monomial -> coefficients per c_j
    for (long j = 0; j <= M; ++j) {
        Poly g1 = Poly::monomial({static_cast<unsigned>(j), 0}, 1);  // z1^j
        Poly g2 = Poly::monomial({0, static_cast<unsigned>(j)}, 1);  // z2^j
        Poly z1 = Poly::variable(2, 0), z2 = Poly::variable(2, 1);
        Poly res = (g2 - g1) * alpha - z1 * z2 * g1.derivative(0).derivative(0);
        if (!drop_transport) res += (z1 - z2) * g1.derivative(0) * alpha;
        for (const auto& [m, c] : res.terms()) {
            auto& r = rows[m];
            r.resize(M + 1, Rational(0));
            r[j] = c;
        }
    }
    std::vector<std::vector<Rational>> A;
    for (auto& [m, r] : rows) {
        r.resize(M + 1, Rational(0));
        A.push_back(r);
    }
    return {nullspace(std::move(A), M + 1)};
}

struct ScalingRow {
    long N;
    double lhs, rhs, err;
};

/// |L^N f(floor(N z)/N) - caL^{-1,gamma} f(floor(N z)/N)| for each N: the
/// extended exclusion operator against its diffusion limit, evaluated at the
/// same grid point to isolate the O(1/N) operator error.
inline std::vector<ScalingRow> scaling_limit_check(long gamma, const RateKernel& kernel,
                                                   const Poly& f, const std::vector<double>& z,
                                                   const std::vector<long>& Ns) {
    if (f.nvars() != kernel.size() || static_cast<int>(z.size()) != kernel.size())
        throw std::invalid_argument("dimension mismatch");
    for (long N : Ns)
        if (N < 10) throw std::invalid_argument("N values must be >= 10");
    Poly limit = apply_diffusion_operator(DiffusionSystem{-1, Rational(gamma)}, kernel, f);
    auto feval = [&f](const std::vector<double>& p) { return f.evaluate_double(p); };
    std::vector<ScalingRow> out;
    for (long N : Ns) {
        Configuration eta(z.size());
        std::vector<double> grid(z.size());
        for (size_t i = 0; i < z.size(); ++i) {
            eta[i] = static_cast<long>(std::floor(N * z[i]));
            grid[i] = static_cast<double>(eta[i]) / N;
        }
        double lhs = apply_extended_sep(gamma, N, kernel, feval, eta);
        double rhs = limit.evaluate_double(grid);
        out.push_back({N, lhs, rhs, std::fabs(lhs - rhs)});
    }
    return out;
}

/// Least-squares slope of log(err) against log(1/N); ~1 for an O(1/N) decay.
inline double empirical_order(const std::vector<ScalingRow>& rows) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    long n = 0;
    for (const auto& r : rows) {
        if (r.err <= 0) continue;
        double x = -std::log(static_cast<double>(r.N));
        double y = std::log(r.err);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++n;
    }
    if (n < 2) throw std::invalid_argument("need at least two nonzero errors");
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace facdual

#endif
