// Interacting particle systems (generator application + Gillespie sampling)
// and their diffusion-limit counterparts.
#ifndef FACDUAL_SYSTEMS_HPP
#define FACDUAL_SYSTEMS_HPP

#include <cmath>
#include <functional>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "facdual/kernel.hpp"
#include "facdual/poly.hpp"
#include "facdual/rational.hpp"

namespace facdual {

enum class Family { IRW, SIP, SEP, SigmaBeta, Custom };

using Configuration = std::vector<long>;
using EnergyConfiguration = std::vector<double>;

inline long total_particles(const Configuration& eta) {
    long t = 0;
    for (long n : eta) t += n;
    return t;
}

inline double total_energy(const EnergyConfiguration& z) {
    double t = 0;
    for (double v : z) t += v;
    return t;
}

/// Configuration after moving one particle x -> y.
inline Configuration moved(Configuration eta, int x, int y) {
    if (eta.at(x) <= 0) throw std::domain_error("move from empty site");
    --eta[x];
    ++eta[y];
    return eta;
}

/// Rate functions u, v of the single-edge generator.  Rates are exact
/// rationals; u(0)=0, u(1)=1, u(n)>0 for n>0; v(0)!=0 and, when the state
/// space is capped at N, v(N)=0.
class ParticleSystem {
  public:
    static ParticleSystem irw() {
        ParticleSystem s;
        s.family_ = Family::IRW;
        s.sigma_ = 0;
        s.beta_ = 1;
        return s;
    }

    static ParticleSystem sip(const Rational& alpha) {
        if (alpha <= 0) throw std::invalid_argument("SIP needs alpha > 0");
        ParticleSystem s;
        s.family_ = Family::SIP;
        s.sigma_ = 1;
        s.beta_ = alpha;
        return s;
    }

    static ParticleSystem sep(long gamma) {
        if (gamma < 1) throw std::invalid_argument("SEP needs gamma >= 1");
        ParticleSystem s;
        s.family_ = Family::SEP;
        s.sigma_ = -1;
        s.beta_ = gamma;
        s.cap_ = gamma;
        return s;
    }

    /// u(n) = n, v(n) = beta + sigma n.  Capped iff sigma < 0, in which case
    /// beta/(-sigma) must be a positive integer.
    static ParticleSystem sigma_beta(const Rational& sigma, const Rational& beta) {
        if (beta <= 0) throw std::invalid_argument("sigma_beta needs beta > 0");
        ParticleSystem s;
        s.family_ = Family::SigmaBeta;
        s.sigma_ = sigma;
        s.beta_ = beta;
        if (sigma < 0) {
            Rational cap = -beta / sigma;
            if (cap.get_den() != 1)
                throw std::invalid_argument("sigma < 0 requires integer beta/(-sigma)");
            s.cap_ = cap.get_num().get_si();
        }
        return s;
    }

    static ParticleSystem custom(std::function<Rational(long)> u, std::function<Rational(long)> v,
                                 std::optional<long> cap = std::nullopt) {
        ParticleSystem s;
        s.family_ = Family::Custom;
        s.cu_ = std::move(u);
        s.cv_ = std::move(v);
        s.cap_ = cap;
        if (s.u(0) != 0 || s.u(1) != 1) throw std::invalid_argument("custom u violates u(0)=0, u(1)=1");
        if (s.v(0) == 0) throw std::invalid_argument("custom v violates v(0) != 0");
        if (cap && s.v(*cap) != 0) throw std::invalid_argument("custom v violates v(N)=0 at the cap");
        return s;
    }

    Family family() const { return family_; }
    const Rational& sigma() const { return sigma_; }
    const Rational& beta() const { return beta_; }
    Rational alpha() const { return beta_; }  // SIP parameter
    long gamma() const { return cap_.value(); }
    std::optional<long> cap() const { return cap_; }

    Rational u(long n) const {
        if (n < 0) throw std::domain_error("u at negative occupation");
        if (family_ == Family::Custom) return cu_(n);
        return n;
    }

    Rational v(long n) const {
        if (n < 0) throw std::domain_error("v at negative occupation");
        if (family_ == Family::Custom) return cv_(n);
        return beta_ + sigma_ * n;
    }

    bool in_state_space(long n) const { return n >= 0 && (!cap_ || n <= *cap_); }

    bool valid_configuration(const Configuration& eta) const {
        for (long n : eta)
            if (!in_state_space(n)) return false;
        return true;
    }

    std::string name() const {
        switch (family_) {
            case Family::IRW: return "IRW";
            case Family::SIP: return "SIP(" + to_string(beta_) + ")";
            case Family::SEP: return "SEP(" + std::to_string(cap_.value()) + ")";
            case Family::SigmaBeta:
                return "L(" + to_string(sigma_) + "," + to_string(beta_) + ")";
            case Family::Custom: return "custom";
        }
        return "?";
    }

  private:
    ParticleSystem() = default;

    Family family_ = Family::Custom;
    Rational sigma_ = 0;
    Rational beta_ = 1;
    std::optional<long> cap_;
    std::function<Rational(long)> cu_, cv_;
};

using ConfigFn = std::function<Rational(const Configuration&)>;

/// Exact generator application:
///   L f(eta) = sum_edges q(x,y) [ u(eta_x)v(eta_y)(f(eta^{x,y}) - f(eta))
///                               + u(eta_y)v(eta_x)(f(eta^{y,x}) - f(eta)) ]
/// with q the symmetrized kernel rate.  Jumps with zero rate are skipped, so
/// f is only ever evaluated on reachable configurations.
inline Rational apply_generator(const ParticleSystem& sys, const RateKernel& kernel,
                                const ConfigFn& f, const Configuration& eta) {
    if (static_cast<int>(eta.size()) != kernel.size())
        throw std::invalid_argument("configuration size does not match kernel");
    if (!sys.valid_configuration(eta))
        throw std::invalid_argument("configuration outside the state space");
    Rational feta = f(eta);
    Rational acc = 0;
    for (const auto& [x, y] : kernel.edges()) {
        Rational q = kernel.symmetrized(x, y);
        Rational rxy = sys.u(eta[x]) * sys.v(eta[y]);
        if (rxy != 0) acc += q * rxy * (f(moved(eta, x, y)) - feta);
        Rational ryx = sys.u(eta[y]) * sys.v(eta[x]);
        if (ryx != 0) acc += q * ryx * (f(moved(eta, y, x)) - feta);
    }
    return acc;
}

struct JumpEvent {
    double time;
    int from, to;
};

struct GillespieResult {
    Configuration state;
    std::vector<JumpEvent> events;  // filled only when requested
    std::string rng = "mt19937_64";
    std::uint64_t seed = 0;
};

/// Event-driven exact sampling of the jump process up to time t.  Total
/// particle number is conserved on every path by construction.
inline GillespieResult gillespie_simulate(const ParticleSystem& sys, const RateKernel& kernel,
                                          const Configuration& eta0, double t, std::uint64_t seed,
                                          bool keep_log = false) {
    if (t < 0) throw std::invalid_argument("negative simulation time");
    if (static_cast<int>(eta0.size()) != kernel.size())
        throw std::invalid_argument("configuration size does not match kernel");
    if (!sys.valid_configuration(eta0))
        throw std::invalid_argument("initial configuration outside the state space");

    GillespieResult res;
    res.state = eta0;
    res.seed = seed;
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    const auto edges = kernel.edges();
    std::vector<double> q;
    for (const auto& [x, y] : edges) q.push_back(to_double(kernel.symmetrized(x, y)));

    // occupation-dependent rates tabulated in double once
    auto u = [&](long n) { return to_double(sys.u(n)); };
    auto v = [&](long n) { return to_double(sys.v(n)); };

    double now = 0;
    std::vector<double> move_rate(2 * edges.size());
    while (true) {
        double total = 0;
        for (size_t e = 0; e < edges.size(); ++e) {
            auto [x, y] = edges[e];
            move_rate[2 * e] = q[e] * u(res.state[x]) * v(res.state[y]);
            move_rate[2 * e + 1] = q[e] * u(res.state[y]) * v(res.state[x]);
            total += move_rate[2 * e] + move_rate[2 * e + 1];
        }
        if (total <= 0) break;  // frozen (e.g. SEP with all sites full)
        double wait = -std::log1p(-unif(rng)) / total;
        if (now + wait > t) break;
        now += wait;
        double r = unif(rng) * total;
        size_t pick = 0;
        while (pick + 1 < move_rate.size() && r >= move_rate[pick]) r -= move_rate[pick++];
        auto [x, y] = edges[pick / 2];
        int from = (pick % 2 == 0) ? x : y;
        int to = (pick % 2 == 0) ? y : x;
        --res.state[from];
        ++res.state[to];
        if (keep_log) res.events.push_back({now, from, to});
    }
    return res;
}

/// Diffusion-limit operator parameters: single-edge operator
///   -beta (z_x - z_y)(d_x - d_y) + sigma z_x z_y (d_x - d_y)^2.
struct DiffusionSystem {
    Rational sigma;
    Rational beta;

    static DiffusionSystem deterministic_limit() { return {0, 1}; }       // IRW limit
    static DiffusionSystem bep(const Rational& alpha) { return {1, alpha}; }
    static DiffusionSystem sep_limit(const Rational& gamma) { return {-1, gamma}; }
};

/// Exact coefficient-level application on a polynomial in the site
/// variables z_1..z_V.
inline Poly apply_diffusion_operator(const DiffusionSystem& dsys, const RateKernel& kernel,
                                     const Poly& f) {
    if (f.nvars() != kernel.size())
        throw std::invalid_argument("polynomial variable count does not match kernel");
    const int n = kernel.size();
    Poly out(n);
    for (const auto& [x, y] : kernel.edges()) {
        Rational q = kernel.symmetrized(x, y);
        Poly zx = Poly::variable(n, x), zy = Poly::variable(n, y);
        Poly d1 = f.derivative(x) - f.derivative(y);
        Poly d2 = d1.derivative(x) - d1.derivative(y);
        Poly term = (zx - zy) * d1 * (-dsys.beta) + (zx * zy) * d2 * dsys.sigma;
        out += term * q;
    }
    return out;
}

/// Truncated-series variant.  Two orders of guaranteed accuracy are given up
/// per application; the result order records that.
inline TruncatedSeries apply_diffusion_operator(const DiffusionSystem& dsys,
                                                const RateKernel& kernel,
                                                const TruncatedSeries& f) {
    if (f.order() < 2)
        throw std::domain_error("series order too low for a second-order operator");
    Poly p = apply_diffusion_operator(dsys, kernel, f.poly());
    return TruncatedSeries(p, f.order() - 2);
}

/// The SEP(gamma) operator extended to the rescaled grid (N/N)^V; the rates
/// eta_x (gamma - eta_y) may be negative, so this is not a Markov generator.
inline double apply_extended_sep(long gamma, long N, const RateKernel& kernel,
                                 const std::function<double(const std::vector<double>&)>& f,
                                 const Configuration& eta) {
    if (N < 1) throw std::invalid_argument("scale N must be >= 1");
    auto scaled = [&](const Configuration& c) {
        std::vector<double> z(c.size());
        for (size_t i = 0; i < c.size(); ++i) z[i] = static_cast<double>(c[i]) / N;
        return z;
    };
    double feta = f(scaled(eta));
    double acc = 0;
    for (const auto& [x, y] : kernel.edges()) {
        double q = to_double(kernel.symmetrized(x, y));
        double rxy = static_cast<double>(eta[x]) * (gamma - eta[y]);
        if (eta[x] > 0) acc += q * rxy * (f(scaled(moved(eta, x, y))) - feta);
        double ryx = static_cast<double>(eta[y]) * (gamma - eta[x]);
        if (eta[y] > 0) acc += q * ryx * (f(scaled(moved(eta, y, x))) - feta);
    }
    return acc;
}

/// All configurations on `sites` sites with total particle number <=
/// max_total, each entry within the optional per-site cap.
inline std::vector<Configuration> enumerate_configurations(int sites, long max_total,
                                                           std::optional<long> cap = std::nullopt) {
    if (sites < 1 || max_total < 0) throw std::invalid_argument("bad enumeration range");
    std::vector<Configuration> out;
    Configuration cur(sites, 0);
    std::function<void(int, long)> rec = [&](int site, long left) {
        if (site == sites) {
            out.push_back(cur);
            return;
        }
        long top = cap ? std::min(left, *cap) : left;
        for (long n = 0; n <= top; ++n) {
            cur[site] = n;
            rec(site + 1, left - n);
        }
        cur[site] = 0;
    };
    rec(0, max_total);
    return out;
}

/// Configurations with total particle number exactly `total`.
inline std::vector<Configuration> enumerate_configurations_exact(
    int sites, long total, std::optional<long> cap = std::nullopt) {
    std::vector<Configuration> out;
    for (auto& c : enumerate_configurations(sites, total, cap))
        if (total_particles(c) == total) out.push_back(std::move(c));
    return out;
}

namespace detail {
/// Quantum grid for conservation: with every coordinate a multiple of the
/// quantum and bounded by the (conserved) total energy, each pairwise
/// transfer is exact in double arithmetic and the configuration sum is
/// conserved bit-exactly.
inline double energy_quantum(double total) {
    if (total <= 0) return 0;
    int e;
    std::frexp(total, &e);
    return std::ldexp(1.0, e - 50);
}

inline double snap(double v, double quantum) {
    return quantum == 0 ? v : std::round(v / quantum) * quantum;
}
}  // namespace detail

struct BepResult {
    EnergyConfiguration state;
    long halvings_used = 0;  // max halvings needed on any single step
    std::string rng = "mt19937_64";
    std::uint64_t seed = 0;
};

/// Euler-Maruyama sample of the Brownian Energy Process BEP(alpha): per edge
/// {x,y} with symmetrized rate q, one shared Brownian increment enters both
/// endpoints with opposite signs,
///   dz_x = q alpha (z_y - z_x) dt + sqrt(2 q z_x z_y) dW,   dz_y = -dz_x.
/// A step that would push any coordinate negative is retried with halved dt
/// (cap 40 halvings, then error).
inline BepResult simulate_bep(const RateKernel& kernel, const Rational& alpha,
                              const EnergyConfiguration& z0, double t, double dt,
                              std::uint64_t seed) {
    if (t < 0) throw std::invalid_argument("negative simulation time");
    if (dt <= 0) throw std::invalid_argument("dt must be positive");
    if (static_cast<int>(z0.size()) != kernel.size())
        throw std::invalid_argument("configuration size does not match kernel");
    for (double z : z0)
        if (z < 0) throw std::invalid_argument("negative initial energy");

    BepResult res;
    res.state = z0;
    res.seed = seed;
    if (t == 0) return res;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const double a = to_double(alpha);

    const auto edges = kernel.edges();
    std::vector<double> q;
    for (const auto& [x, y] : edges) q.push_back(to_double(kernel.symmetrized(x, y)));

    // Conservation grid: coordinates live on multiples of a fixed quantum
    // (~2^-50 relative to the total energy), so every transfer is exact.
    const double quantum = detail::energy_quantum(total_energy(res.state));
    for (double& z : res.state) z = detail::snap(z, quantum);

    double now = 0;
    while (now < t) {
        double h = std::min(dt, t - now);
        long halvings = 0;
        while (true) {
            EnergyConfiguration z = res.state;
            bool ok = true;
            for (size_t e = 0; e < edges.size() && ok; ++e) {
                auto [x, y] = edges[e];
                double drift = q[e] * a * (z[y] - z[x]) * h;
                double noise = std::sqrt(std::max(0.0, 2.0 * q[e] * z[x] * z[y]) * h) * normal(rng);
                double transfer = detail::snap(drift + noise, quantum);
                double zx = z[x] + transfer;
                double zy = z[y] - transfer;
                if (zx < 0 || zy < 0) {
                    ok = false;
                    break;
                }
                z[x] = zx;
                z[y] = zy;
            }
            if (ok) {
                res.state = std::move(z);
                break;
            }
            if (++halvings > 40)
                throw std::runtime_error("BEP step-halving retry cap exceeded");
            h /= 2;
        }
        res.halvings_used = std::max(res.halvings_used, halvings);
        now += h;
    }
    return res;
}

}  // namespace facdual

#endif
