// spectrum.hpp — bi-indexed spectrum (g, gamma) of complex-profile harmonics
// e^{i<g,theta> - <gamma,r>} with the membership constraint |g_mu| <= gamma_mu.

#pragma once

#include <cstdlib>
#include <numeric>
#include <string>
#include <vector>

namespace cgo {

struct SpecIndex {
    std::vector<int> g, gamma;

    SpecIndex() = default;
    SpecIndex(std::vector<int> gg, std::vector<int> cc) : g(std::move(gg)), gamma(std::move(cc)) {}

    int m() const { return int(g.size()); }

    bool in_sigma() const {
        for (size_t i = 0; i < g.size(); ++i)
            if (gamma[i] < 0 || std::abs(g[i]) > gamma[i]) return false;
        return true;
    }
    bool zero_g() const {
        for (int v : g)
            if (v) return false;
        return true;
    }
    bool oscillatory() const { return in_sigma() && !zero_g(); }

    // Sigma_mu: gamma_nu = 0 for nu != mu. Returns the 0-based mu, or -1.
    int sigma_mu() const {
        int mu = -1;
        for (size_t i = 0; i < gamma.size(); ++i) {
            if (gamma[i] > 0) {
                if (mu >= 0) return -1;
                mu = int(i);
            }
        }
        return mu;
    }

    int gamma_max() const {
        int v = 0;
        for (int c : gamma) v = std::max(v, c);
        return v;
    }

    double order() const {
        double s = 0;
        for (int v : g) s += double(v) * v;
        for (int v : gamma) s += double(v) * v;
        return std::sqrt(s);
    }

    SpecIndex conjugated() const {
        SpecIndex out = *this;
        for (auto& v : out.g) v = -v;
        return out;
    }

    SpecIndex operator+(const SpecIndex& o) const {
        SpecIndex out = *this;
        for (size_t i = 0; i < g.size(); ++i) {
            out.g[i] += o.g[i];
            out.gamma[i] += o.gamma[i];
        }
        return out;
    }

    bool operator<(const SpecIndex& o) const {
        if (g != o.g) return g < o.g;
        return gamma < o.gamma;
    }
    bool operator==(const SpecIndex& o) const { return g == o.g && gamma == o.gamma; }

    static SpecIndex fundamental(int m, int mu) {
        SpecIndex idx(std::vector<int>(m, 0), std::vector<int>(m, 0));
        idx.g[mu] = 1;
        idx.gamma[mu] = 1;
        return idx;
    }
    static SpecIndex zero(int m) {
        return SpecIndex(std::vector<int>(m, 0), std::vector<int>(m, 0));
    }

    std::string str() const {
        std::string s = "(g=";
        for (size_t i = 0; i < g.size(); ++i) s += (i ? "," : "") + std::to_string(g[i]);
        s += "; gamma=";
        for (size_t i = 0; i < gamma.size(); ++i) s += (i ? "," : "") + std::to_string(gamma[i]);
        return s + ")";
    }
};

// All indices of Sigma_osc with gamma_mu <= G componentwise (enumeration used
// by randomized operator tests; grows fast with m, keep G modest for m >= 2).
std::vector<SpecIndex> enumerate_sigma_osc(int m, int G);

} // namespace cgo
