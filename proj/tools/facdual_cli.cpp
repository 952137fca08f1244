// Command-line front end: duality tables, exact verification sweeps,
// certified stationary checks, characterization searches, simulation, and
// the exclusion scaling check.  Deterministic for a fixed config and seed.
//
// Exit codes: 0 success, 1 verification failure, 2 usage error, 3 bad
// parameters.
#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "facdual/verify.hpp"

using namespace facdual;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerificationFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitBadParameters = 3;

struct GlobalOpts {
    std::string out = ".";
    std::uint64_t seed = 12345;
    int threads = 1;
};

struct SystemOpts {
    std::string name = "sip";
    std::string alpha = "1";
    long gamma = 1;
    std::string sigma = "0";
    std::string beta = "1";
};

struct KernelOpts {
    std::string file;
    int sites = 3;
    std::string topology = "path";
};

struct FamilyOpts {
    std::string name = "classical";
    std::string a = "0", b = "1", lambda = "1/2";
};

void add_system_flags(CLI::App* cmd, SystemOpts& s) {
    cmd->add_option("--system", s.name, "particle system: irw | sip | sep | general")
        ->check(CLI::IsMember({"irw", "sip", "sep", "general"}));
    cmd->add_option("--alpha", s.alpha, "inclusion parameter alpha (rational)");
    cmd->add_option("--gamma", s.gamma, "exclusion capacity gamma");
    cmd->add_option("--sigma", s.sigma, "general-system sigma (rational)");
    cmd->add_option("--beta", s.beta, "general-system beta (rational)");
}

void add_kernel_flags(CLI::App* cmd, KernelOpts& k) {
    cmd->add_option("--kernel", k.file, "rate kernel config file");
    cmd->add_option("--sites", k.sites, "number of sites for a generated kernel")
        ->check(CLI::Range(2, 16));
    cmd->add_option("--topology", k.topology, "generated kernel shape: path | cycle")
        ->check(CLI::IsMember({"path", "cycle"}));
}

void add_family_flags(CLI::App* cmd, FamilyOpts& f) {
    cmd->add_option("--family", f.name,
                    "duality family: classical | orthogonal | cheap | trivial")
        ->check(CLI::IsMember({"classical", "orthogonal", "cheap", "trivial"}));
    cmd->add_option("--a", f.a, "family parameter a (rational)");
    cmd->add_option("--b", f.b, "family parameter b (rational)");
    cmd->add_option("--lambda", f.lambda, "marginal parameter lambda (rational)");
}

ParticleSystem make_system(const SystemOpts& s) {
    if (s.name == "irw") return ParticleSystem::irw();
    if (s.name == "sip") return ParticleSystem::sip(parse_rational(s.alpha));
    if (s.name == "sep") return ParticleSystem::sep(s.gamma);
    return ParticleSystem::sigma_beta(parse_rational(s.sigma), parse_rational(s.beta));
}

RateKernel make_kernel(const KernelOpts& k) {
    if (!k.file.empty()) { std::ifstream in(k.file); if (!in) throw std::invalid_argument("cannot open kernel file: " + k.file); return load_kernel(in); }
    return k.topology == "cycle" ? cycle_kernel(k.sites) : path_kernel(k.sites);
}

SingleSiteDuality make_family(const ParticleSystem& sys, const FamilyOpts& f) {
    if (f.name == "classical") return SingleSiteDuality::classical(sys);
    if (f.name == "orthogonal")
        return SingleSiteDuality::orthogonal(sys, parse_rational(f.a), parse_rational(f.b));
    if (f.name == "cheap") return SingleSiteDuality::cheap(sys, parse_rational(f.lambda));
    return SingleSiteDuality::trivial(parse_rational(f.a));
}

Configuration parse_configuration(const std::string& text) {
    Configuration c;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        c.push_back(std::stol(item));
    }
    if (c.empty()) throw std::invalid_argument("empty configuration: " + text);
    return c;
}

std::vector<long> parse_longs(const std::string& text) {
    std::vector<long> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(std::stol(item));
    return out;
}

std::string join_config(const Configuration& c) {
    std::string s;
    for (size_t i = 0; i < c.size(); ++i) s += (i ? "," : "") + std::to_string(c[i]);
    return s;
}

/// CSV sink: every numeric cell row carries its provenance
/// (exact | certified-bracket | monte-carlo).
class CsvWriter {
  public:
    CsvWriter(const std::string& dir, const std::string& name,
              const std::vector<std::string>& columns) {
        std::filesystem::create_directories(dir);
        path_ = dir + "/" + name;
        out_.open(path_);
        if (!out_) throw std::runtime_error("cannot write " + path_);
        for (size_t i = 0; i < columns.size(); ++i) out_ << (i ? "," : "") << columns[i];
        out_ << ",provenance\n";
    }

    void row(const std::vector<std::string>& cells, const std::string& provenance) {
        for (size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
        out_ << "," << provenance << "\n";
    }

    // file name only: summaries stay byte-identical across output directories
    std::string name() const { return std::filesystem::path(path_).filename().string(); }

  private:
    std::string path_;
    std::ofstream out_;
};

void emit_summary(const GlobalOpts& g, json summary) {
    std::filesystem::create_directories(g.out);
    summary["seed"] = g.seed;
    std::string text = summary.dump(2);
    std::ofstream f(g.out + "/summary.json");
    f << text << "\n";
    std::printf("%s\n", text.c_str());
}

/// Deterministic chunked reduction: per-chunk partial sums are combined in
/// chunk order regardless of thread scheduling.
template <typename Fn>
std::vector<double> parallel_sums(long n, int threads, int width, const Fn& fn) {
    threads = std::max(1, threads);
    long chunk = (n + threads - 1) / threads;
    std::vector<std::vector<double>> partial(threads, std::vector<double>(width, 0.0));
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&, t] {
            long lo = t * chunk, hi = std::min(n, lo + chunk);
            for (long i = lo; i < hi; ++i) fn(i, partial[t]);
        });
    for (auto& th : pool) th.join();
    std::vector<double> total(width, 0.0);
    for (const auto& p : partial)
        for (int j = 0; j < width; ++j) total[j] += p[j];
    return total;
}

// ---- subcommands ----

int run_tables(const GlobalOpts& g, const SystemOpts& so, const FamilyOpts& fo, long kmax,
               long nmax) {
    auto sys = make_system(so);
    if (sys.cap()) {
        kmax = std::min(kmax, *sys.cap());
        nmax = std::min(nmax, *sys.cap());
    }
    Rational a = parse_rational(fo.a), b = parse_rational(fo.b);
    Rational lambda = parse_rational(fo.lambda);
    bool cheap_ok = MarginalFamily(sys).admissible(lambda);
    CsvWriter csv(g.out, "tables.csv", {"k", "n", "classical", "orthogonal", "cheap"});
    for (long k = 0; k <= kmax; ++k)
        for (long n = 0; n <= nmax; ++n)
            csv.row({std::to_string(k), std::to_string(n), to_string(classical_d(sys, k, n)),
                     to_string(orthogonal_d(sys, a, b, k, n)),
                     cheap_ok ? to_string(cheap_d(sys, lambda, k, n)) : "inadmissible"},
                    "exact");
    emit_summary(g, {{"command", "tables"},
                     {"system", sys.name()},
                     {"rows", (kmax + 1) * (nmax + 1)},
                     {"csv", csv.name()}});
    return kExitOk;
}

int run_verify_duality(const GlobalOpts& g, const SystemOpts& so, const KernelOpts& ko,
                       const FamilyOpts& fo, long ximax, long etamax) {
    auto sys = make_system(so);
    auto kernel = make_kernel(ko);
    auto d = make_family(sys, fo);
    auto xis = enumerate_configurations(kernel.size(), ximax, sys.cap());
    long ecap = sys.cap() ? std::min(etamax, *sys.cap()) : etamax;
    auto etas = enumerate_configurations(kernel.size(), etamax * kernel.size(), ecap);

    long checked = static_cast<long>(xis.size() * etas.size());
    auto sums = parallel_sums(static_cast<long>(xis.size()), g.threads, 1,
                              [&](long i, std::vector<double>& acc) {
                                  for (const auto& eta : etas)
                                      if (duality_residual_discrete(sys, kernel, d, xis[i],
                                                                    eta) != 0)
                                          acc[0] += 1;
                              });
    long nonzero = static_cast<long>(sums[0]);
    emit_summary(g, {{"command", "verify-duality"},
                     {"system", sys.name()},
                     {"family", fo.name},
                     {"residuals_checked", checked},
                     {"residuals_nonzero", nonzero},
                     {"result", nonzero == 0 ? "pass" : "fail"}});
    std::printf("residuals: %ld nonzero / %ld checked\n", nonzero, checked);
    return nonzero == 0 ? kExitOk : kExitVerificationFailure;
}

int run_verify_intertwining(const GlobalOpts& g, const SystemOpts& so, const KernelOpts& ko,
                            long degree) {
    auto sys = make_system(so);
    auto kernel = make_kernel(ko);
    long checked = 0, nonzero = 0;
    for (const auto& c : enumerate_configurations(kernel.size(), std::min(degree, 3L),
                                                  sys.cap())) {
        ++checked;
        if (!check_intertwining(sys, kernel, FinSupportFn::delta(c)).is_zero()) ++nonzero;
    }
    Poly z1 = Poly::variable(kernel.size(), 0), z2 = Poly::variable(kernel.size(), 1);
    for (const Poly& p : {z1, z1 * z2, z1 * z1, z1 * z1 * z2}) {
        if (p.degree() > degree) continue;
        ++checked;
        if (!check_inverse_intertwining(sys, kernel, p, degree).is_zero()) ++nonzero;
    }
    emit_summary(g, {{"command", "verify-intertwining"},
                     {"sigma", to_string(sys.sigma())},
                     {"beta", to_string(sys.beta())},
                     {"residuals_checked", checked},
                     {"residuals_nonzero", nonzero},
                     {"result", nonzero == 0 ? "pass" : "fail"}});
    return nonzero == 0 ? kExitOk : kExitVerificationFailure;
}

int run_verify_continuum(const GlobalOpts& g, const KernelOpts& ko, const std::string& family,
                         const std::string& param, const std::string& c, long order) {
    auto kernel = make_kernel(ko);
    ContinuumFamily fam;
    DiffusionSystem dsys{0, 1};
    Rational p = parse_rational(param);
    if (family == "exponential") {
        fam = ContinuumFamily::Exponential;
        dsys = DiffusionSystem::deterministic_limit();
    } else if (family == "confluent") {
        fam = ContinuumFamily::Confluent;
        dsys = DiffusionSystem::bep(p);
    } else {
        fam = ContinuumFamily::TruncatedSep;
        dsys = DiffusionSystem::sep_limit(p.get_num().get_si());
    }
    auto res = selfduality_residual_continuum(dsys, kernel, fam, p, parse_rational(c), order);
    bool ok = res.guaranteed_zero();
    emit_summary(g, {{"command", "verify-continuum"},
                     {"family", family},
                     {"order", order},
                     {"guaranteed_zero", ok},
                     {"result", ok ? "pass" : "fail"}});
    return ok ? kExitOk : kExitVerificationFailure;
}

int run_stationary(const GlobalOpts& g, const SystemOpts& so, const FamilyOpts& fo,
                   const std::string& xi_text) {
    auto sys = make_system(so);
    auto d = make_family(sys, fo);
    Configuration xi = parse_configuration(xi_text);
    auto res = stationary_relation_check(sys, d, parse_rational(fo.lambda), xi);
    CsvWriter csv(g.out, "stationary.csv",
                  {"xi", "moment_lo", "moment_hi", "expected", "pass"});
    csv.row({join_config(xi), to_string(res.moment.lo), to_string(res.moment.hi),
             to_string(res.expected.lo), res.pass ? "1" : "0"},
            "certified-bracket");
    emit_summary(g, {{"command", "stationary-check"},
                     {"system", sys.name()},
                     {"family", fo.name},
                     {"moment_lo", to_string(res.moment.lo)},
                     {"moment_hi", to_string(res.moment.hi)},
                     {"expected", to_string(res.expected.lo)},
                     {"result", res.pass ? "pass" : "fail"},
                     {"csv", csv.name()}});
    return res.pass ? kExitOk : kExitVerificationFailure;
}

int run_characterize(const GlobalOpts& g, const std::string& u_text, const std::string& v_text,
                     bool continuum, const std::string& alpha, long M) {
    SolutionSpace sol;
    if (continuum) {
        sol = characterize_continuum_first_dual(parse_rational(alpha), M);
    } else {
        std::vector<Rational> u, v;
        for (long x : parse_longs(u_text)) u.push_back(x);
        for (long x : parse_longs(v_text)) v.push_back(x);
        sol = characterize_selfduality(u, v);
    }
    CsvWriter csv(g.out, "characterize.csv", {"basis_vector", "entry", "value"});
    for (size_t i = 0; i < sol.basis.size(); ++i)
        for (size_t j = 0; j < sol.basis[i].size(); ++j)
            csv.row({std::to_string(i), std::to_string(j), to_string(sol.basis[i][j])},
                    "exact");
    emit_summary(g, {{"command", "characterize"},
                     {"dimension", sol.dimension()},
                     {"csv", csv.name()}});
    return kExitOk;
}

int run_simulate(const GlobalOpts& g, const SystemOpts& so, const KernelOpts& ko,
                 const std::string& mode, const std::string& start, double t, long paths,
                 double dt) {
    auto kernel = make_kernel(ko);
    const int V = kernel.size();
    std::vector<double> sums;
    if (mode == "jump") {
        auto sys = make_system(so);
        Configuration eta0 = parse_configuration(start);
        if (static_cast<int>(eta0.size()) != V)
            throw std::invalid_argument("start configuration does not match kernel");
        sums = parallel_sums(paths, g.threads, V, [&](long i, std::vector<double>& acc) {
            auto res = gillespie_simulate(sys, kernel, eta0, t,
                                          g.seed + static_cast<std::uint64_t>(i));
            for (int x = 0; x < V; ++x) acc[x] += static_cast<double>(res.state[x]);
        });
    } else {
        EnergyConfiguration z0;
        for (long v : parse_configuration(start)) z0.push_back(static_cast<double>(v));
        if (static_cast<int>(z0.size()) != V)
            throw std::invalid_argument("start configuration does not match kernel");
        Rational alpha = parse_rational(so.alpha);
        sums = parallel_sums(paths, g.threads, V, [&](long i, std::vector<double>& acc) {
            auto res = simulate_bep(kernel, alpha, z0, t, dt,
                                    g.seed + static_cast<std::uint64_t>(i));
            for (int x = 0; x < V; ++x) acc[x] += res.state[x];
        });
    }
    CsvWriter csv(g.out, "simulate.csv", {"site", "mean_occupation"});
    json means = json::array();
    for (int x = 0; x < V; ++x) {
        double m = sums[x] / static_cast<double>(paths);
        csv.row({std::to_string(x), std::to_string(m)}, "monte-carlo");
        means.push_back(m);
    }
    emit_summary(g, {{"command", "simulate"},
                     {"mode", mode},
                     {"paths", paths},
                     {"t", t},
                     {"site_means", means},
                     {"csv", csv.name()}});
    return kExitOk;
}

int run_scaling(const GlobalOpts& g, long gamma, const std::string& z_text,
                const std::string& n_text) {
    auto kernel = path_kernel(2);
    Poly f = Poly::variable(2, 0) * Poly::variable(2, 1);
    std::vector<double> z;
    for (long v : parse_longs(z_text)) z.push_back(static_cast<double>(v));
    auto rows = scaling_limit_check(gamma, kernel, f, z, parse_longs(n_text));
    CsvWriter csv(g.out, "scaling.csv", {"N", "lhs", "rhs", "err"});
    for (const auto& r : rows)
        csv.row({std::to_string(r.N), std::to_string(r.lhs), std::to_string(r.rhs),
                 std::to_string(r.err)},
                "monte-carlo");
    double order = empirical_order(rows);
    bool ok = order > 0.8 && order < 1.2;
    emit_summary(g, {{"command", "scaling-check"},
                     {"gamma", gamma},
                     {"empirical_order", order},
                     {"result", ok ? "pass" : "fail"},
                     {"csv", csv.name()}});
    return ok ? kExitOk : kExitVerificationFailure;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Factorized duality toolbox for interacting particle systems"};
    app.require_subcommand(1);
    app.set_config("--config", "", "config file fully specifying a run");

    GlobalOpts g;
    app.add_option("--out", g.out, "output directory for CSV/JSON artifacts");
    app.add_option("--seed", g.seed, "random seed for Monte Carlo subcommands");
    app.add_option("--threads", g.threads, "worker threads for sweeps")->check(CLI::Range(1, 64));

    SystemOpts so;
    KernelOpts ko;
    FamilyOpts fo;

    auto* tables = app.add_subcommand("tables", "emit duality-family value tables");
    long kmax = 4, nmax = 4;
    add_system_flags(tables, so);
    add_family_flags(tables, fo);
    tables->add_option("--kmax", kmax);
    tables->add_option("--nmax", nmax);

    auto* vd = app.add_subcommand("verify-duality", "exact self-duality residual sweep");
    long ximax = 3, etamax = 4;
    add_system_flags(vd, so);
    add_kernel_flags(vd, ko);
    add_family_flags(vd, fo);
    vd->add_option("--ximax", ximax, "max dual particle total");
    vd->add_option("--etamax", etamax, "max occupation per site");

    auto* vi = app.add_subcommand("verify-intertwining",
                                  "generating-function intertwining residuals");
    long degree = 4;
    add_system_flags(vi, so);
    add_kernel_flags(vi, ko);
    vi->add_option("--degree", degree, "max polynomial degree / support total");

    auto* vc = app.add_subcommand("verify-continuum", "continuum self-duality series residual");
    std::string cfam = "confluent", cparam = "1", cc = "1";
    long order = 12;
    add_kernel_flags(vc, ko);
    vc->add_option("--cfamily", cfam, "exponential | confluent | sep")
        ->check(CLI::IsMember({"exponential", "confluent", "sep"}));
    vc->add_option("--param", cparam, "alpha or gamma (rational)");
    vc->add_option("--c", cc, "family scale c (rational)");
    vc->add_option("--order", order);

    auto* st = app.add_subcommand("stationary-check", "certified stationary moment bracket");
    std::string xi_text = "1";
    add_system_flags(st, so);
    add_family_flags(st, fo);
    st->add_option("--xi", xi_text, "dual configuration, comma separated");

    auto* ch = app.add_subcommand("characterize", "solution space of the first dual function");
    std::string u_text = "0,1,2,3,4,5,6", v_text = "1,2,3,4,5,6,7", alpha_text = "1";
    bool continuum = false;
    long M = 5;
    ch->add_option("--u", u_text, "u table, comma separated");
    ch->add_option("--v", v_text, "v table, comma separated");
    ch->add_flag("--continuum", continuum, "polynomial ansatz for the diffusion operator");
    ch->add_option("--calpha", alpha_text, "continuum alpha (rational)");
    ch->add_option("--M", M, "polynomial degree bound");

    auto* sim = app.add_subcommand("simulate", "Monte Carlo paths, site occupation means");
    std::string mode = "jump", start = "2,0,1";
    double t = 1.0, dt = 0.01;
    long paths = 1000;
    add_system_flags(sim, so);
    add_kernel_flags(sim, ko);
    sim->add_option("--mode", mode)->check(CLI::IsMember({"jump", "diffusion"}));
    sim->add_option("--start", start, "initial configuration, comma separated");
    sim->add_option("--t", t);
    sim->add_option("--dt", dt, "diffusion time step");
    sim->add_option("--paths", paths);

    auto* sc = app.add_subcommand("scaling-check", "exclusion operator vs diffusion limit");
    long gamma = 1;
    std::string z_text = "1,1", n_text = "100,1000,10000";
    sc->add_option("--sgamma", gamma, "exclusion capacity");
    sc->add_option("--z", z_text, "macroscopic point, comma separated integers");
    sc->add_option("--Ns", n_text, "scaling parameters, comma separated");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (tables->parsed()) return run_tables(g, so, fo, kmax, nmax);
        if (vd->parsed()) return run_verify_duality(g, so, ko, fo, ximax, etamax);
        if (vi->parsed()) return run_verify_intertwining(g, so, ko, degree);
        if (vc->parsed()) return run_verify_continuum(g, ko, cfam, cparam, cc, order);
        if (st->parsed()) return run_stationary(g, so, fo, xi_text);
        if (ch->parsed()) return run_characterize(g, u_text, v_text, continuum, alpha_text, M);
        if (sim->parsed()) return run_simulate(g, so, ko, mode, start, t, paths, dt);
        if (sc->parsed()) return run_scaling(g, gamma, z_text, n_text);
    } catch (const std::invalid_argument& e) {
        std::fprintf(stderr, "bad parameters: %s\n", e.what());
        return kExitBadParameters;
    } catch (const std::domain_error& e) {
        std::fprintf(stderr, "bad parameters: %s\n", e.what());
        return kExitBadParameters;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitBadParameters;
    }
    return kExitUsage;
}
