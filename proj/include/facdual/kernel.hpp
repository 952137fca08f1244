// Finite site sets and validated jump-rate kernels p(x,y).
#ifndef FACDUAL_KERNEL_HPP
#define FACDUAL_KERNEL_HPP

#include <istream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "facdual/rational.hpp"

namespace facdual {

/// Jump rates p(x,y) >= 0 on a finite ordered site set.  Immutable after
/// construction; generators only ever use the symmetrized sum
/// p(x,y) + p(y,x), so p itself need not be symmetric.
class RateKernel {
  public:
    explicit RateKernel(std::vector<std::string> site_names)
        : names_(std::move(site_names)),
          rates_(names_.size(), std::vector<Rational>(names_.size(), 0)) {}

    explicit RateKernel(int n_sites) : RateKernel(default_names(n_sites)) {}

    int size() const { return static_cast<int>(names_.size()); }
    const std::vector<std::string>& site_names() const { return names_; }

    void set_rate(int x, int y, const Rational& r) {
        if (r < 0) throw std::invalid_argument("negative jump rate");
        rates_.at(x).at(y) = r;
    }

    const Rational& rate(int x, int y) const { return rates_.at(x).at(y); }

    /// p(x,y) + p(y,x); the only combination entering single-edge generators.
    Rational symmetrized(int x, int y) const { return rates_.at(x).at(y) + rates_.at(y).at(x); }

    /// Unordered edges {x,y}, x < y, with symmetrized rate > 0.
    std::vector<std::pair<int, int>> edges() const {
        std::vector<std::pair<int, int>> out;
        for (int x = 0; x < size(); ++x)
            for (int y = x + 1; y < size(); ++y)
                if (symmetrized(x, y) > 0) out.emplace_back(x, y);
        return out;
    }

    int site_index(const std::string& name) const {
        for (int i = 0; i < size(); ++i)
            if (names_[i] == name) return i;
        throw std::invalid_argument("unknown site \"" + name + "\"");
    }

  private:
    static std::vector<std::string> default_names(int n) {
        if (n < 1) throw std::invalid_argument("kernel needs at least one site");
        std::vector<std::string> v;
        for (int i = 1; i <= n; ++i) v.push_back(std::to_string(i));
        return v;
    }

    std::vector<std::string> names_;
    std::vector<std::vector<Rational>> rates_;
};

struct ValidationReport {
    bool diagonal_ok = true;       // p(x,x) = 0 for all x
    bool irreducible = true;       // support graph connected
    std::vector<std::string> violations;

    bool valid() const { return diagonal_ok && irreducible; }
};

/// Report-style check of the two kernel invariants; pure.
inline ValidationReport validate(const RateKernel& k) {
    ValidationReport rep;
    for (int x = 0; x < k.size(); ++x)
        if (k.rate(x, x) != 0) {
            rep.diagonal_ok = false;
            rep.violations.push_back("nonzero diagonal rate at site " + k.site_names()[x]);
        }
    // connectivity of the symmetrized support graph
    std::vector<char> seen(k.size(), 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
        int x = stack.back();
        stack.pop_back();
        for (int y = 0; y < k.size(); ++y)
            if (!seen[y] && x != y && k.symmetrized(x, y) > 0) {
                seen[y] = 1;
                stack.push_back(y);
            }
    }
    for (int x = 0; x < k.size(); ++x)
        if (!seen[x]) {
            rep.irreducible = false;
            rep.violations.push_back("site " + k.site_names()[x] +
                                     " not reachable from site " + k.site_names()[0]);
        }
    return rep;
}

/// Nearest-neighbor path with unit rates in both directions.
inline RateKernel path_kernel(int n) {
    if (n < 2) throw std::invalid_argument("path_kernel needs n >= 2");
    RateKernel k(n);
    for (int i = 0; i + 1 < n; ++i) {
        k.set_rate(i, i + 1, 1);
        k.set_rate(i + 1, i, 1);
    }
    return k;
}

inline RateKernel cycle_kernel(int n) {
    if (n < 2) throw std::invalid_argument("cycle_kernel needs n >= 2");
    RateKernel k = path_kernel(n);
    if (n > 2) {
        k.set_rate(n - 1, 0, 1);
        k.set_rate(0, n - 1, 1);
    }
    return k;
}

/// Text format, one directive per line:
///   sites a b c
///   rate a b 1/2
/// '#' starts a comment.  Rates use exact "num/den" syntax.
inline RateKernel load_kernel(std::istream& in) {
    std::vector<std::string> names;
    std::vector<std::tuple<std::string, std::string, Rational>> triples;
    std::string line;
    while (std::getline(in, line)) {
        auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string word;
        if (!(ls >> word)) continue;
        if (word == "sites") {
            std::string s;
            while (ls >> s) names.push_back(s);
        } else if (word == "rate") {
            std::string a, b, r;
            if (!(ls >> a >> b >> r)) throw std::invalid_argument("malformed rate line: " + line);
            triples.emplace_back(a, b, parse_rational(r));
        } else {
            throw std::invalid_argument("unknown kernel directive: " + word);
        }
    }
    if (names.empty()) throw std::invalid_argument("kernel config has no sites line");
    RateKernel k(names);
    for (const auto& [a, b, r] : triples) k.set_rate(k.site_index(a), k.site_index(b), r);
    return k;
}

}  // namespace facdual

#endif
