#include "cgo/profile.hpp"

#include <cmath>

#include "cgo/errors.hpp"

namespace cgo {

std::vector<SpecIndex> enumerate_sigma_osc(int m, int G) {
    std::vector<SpecIndex> out;
    std::vector<int> gamma(m, 0), g(m, 0);
    // enumerate gamma in [0,G]^m then g in prod [-gamma_mu, gamma_mu]
    std::function<void(int)> rec_gamma = [&](int d) {
        if (d == m) {
            std::function<void(int)> rec_g = [&](int e) {
                if (e == m) {
                    SpecIndex idx(g, gamma);
                    if (idx.oscillatory()) out.push_back(idx);
                    return;
                }
                for (g[e] = -gamma[e]; g[e] <= gamma[e]; ++g[e]) rec_g(e + 1);
                g[e] = 0;
            };
            rec_g(0);
            return;
        }
        for (gamma[d] = 0; gamma[d] <= G; ++gamma[d]) rec_gamma(d + 1);
        gamma[d] = 0;
    };
    rec_gamma(0);
    return out;
}

void GridProfile::set_field(const SpecIndex& idx, std::vector<MatC> field) {
    if (int(field.size()) != nodes())
        throw ShapeMismatch("coefficient field has wrong node count");
    if (!idx.in_sigma())
        throw ShapeMismatch("index outside the spectrum: " + idx.str());
    if (oscillatory_only && idx.zero_g())
        throw ShapeMismatch("non-oscillatory index in an oscillatory profile: " + idx.str());
    coeffs[idx] = std::move(field);
}

void GridProfile::set_constant(const SpecIndex& idx, const MatC& value) {
    set_field(idx, std::vector<MatC>(nodes(), value));
}

MatC GridProfile::coeff_at(const SpecIndex& idx, double t, double x) const {
    auto it = coeffs.find(idx);
    if (it == coeffs.end()) return MatC::Zero(rows, cols);
    const auto& f = it->second;
    const double ft = (t - 0.0) / grid.dt();
    const double fx = (x - (grid.xbar - grid.rho)) / grid.dx();
    int i = std::clamp(int(std::floor(ft)), 0, grid.nt - 2);
    int j = std::clamp(int(std::floor(fx)), 0, grid.nx - 2);
    const double a = std::clamp(ft - i, 0.0, 1.0), b = std::clamp(fx - j, 0.0, 1.0);
    return (1 - a) * (1 - b) * f[node(i, j)] + (1 - a) * b * f[node(i, j + 1)] +
           a * (1 - b) * f[node(i + 1, j)] + a * b * f[node(i + 1, j + 1)];
}

double GridProfile::max_coeff_norm() const {
    double v = 0.0;
    for (const auto& [idx, f] : coeffs)
        for (const auto& M : f) v = std::max(v, M.cwiseAbs().maxCoeff());
    return v;
}

double GridProfile::tail_fraction() const {
    double tail = 0.0, all = 0.0;
    for (const auto& [idx, f] : coeffs) {
        double v = 0.0;
        for (const auto& M : f) v = std::max(v, M.cwiseAbs().maxCoeff());
        all = std::max(all, v);
        if (idx.gamma_max() == G) tail = std::max(tail, v);
    }
    return all > 0 ? tail / all : 0.0;
}

ProductResult product(const GridProfile& a, const GridProfile& b, ProductKeep keep) {
    if (a.m != b.m) throw ShapeMismatch("profiles have different phase counts");
    if (a.grid.nt != b.grid.nt || a.grid.nx != b.grid.nx)
        throw ShapeMismatch("profiles live on different grids");
    const bool a_scalar = (a.rows == 1 && a.cols == 1);
    const bool b_scalar = (b.rows == 1 && b.cols == 1);
    if (!a_scalar && !b_scalar && a.cols != b.rows)
        throw ShapeMismatch("coefficient shapes not composable: (" + std::to_string(a.rows) +
                            "x" + std::to_string(a.cols) + ") * (" + std::to_string(b.rows) +
                            "x" + std::to_string(b.cols) + ")");
    ProductResult out;
    out.value.grid = a.grid;
    out.value.m = a.m;
    out.value.G = std::min(a.G, b.G);
    out.value.rows = a_scalar ? b.rows : a.rows;
    out.value.cols = b_scalar ? a.cols : b.cols;
    out.value.oscillatory_only = (keep == ProductKeep::Oscillatory);
    const int n = a.nodes();

    for (const auto& [i1, f1] : a.coeffs) {
        for (const auto& [i2, f2] : b.coeffs) {
            SpecIndex idx = i1 + i2;
            bool truncated = false;
            for (int mu = 0; mu < idx.m(); ++mu)
                if (idx.gamma[mu] > out.value.G) truncated = true;
            if (truncated) continue;

            std::vector<MatC> prod(n);
            for (int k = 0; k < n; ++k) {
                if (a_scalar)
                    prod[k] = f1[k](0, 0) * f2[k];
                else if (b_scalar)
                    prod[k] = f1[k] * f2[k](0, 0);
                else
                    prod[k] = f1[k] * f2[k];
            }
            if (idx.zero_g()) {
                double mass = 0.0;
                for (const auto& M : prod) mass = std::max(mass, M.cwiseAbs().maxCoeff());
                out.rectification_mass += mass;
                if (keep == ProductKeep::Oscillatory) continue;
            }
            auto it = out.value.coeffs.find(idx);
            if (it == out.value.coeffs.end()) {
                out.value.coeffs.emplace(idx, std::move(prod));
            } else {
                for (int k = 0; k < n; ++k) it->second[k] += prod[k];
            }
        }
    }
    // spectrum closure |g| <= gamma holds term by term; assert it anyway
    for (const auto& [idx, f] : out.value.coeffs)
        if (!idx.in_sigma())
            throw ShapeMismatch("product left the spectrum at " + idx.str());
    return out;
}

namespace {

GridProfile index_scale(const GridProfile& u, const std::function<cplx(const SpecIndex&)>& w) {
    GridProfile out = u;
    for (auto& [idx, f] : out.coeffs) {
        const cplx c = w(idx);
        for (auto& M : f) M *= c;
    }
    return out;
}

} // namespace

GridProfile dz(const GridProfile& u, int mu) {
    return index_scale(u, [mu](const SpecIndex& i) {
        return cplx(0.0, 0.5) * double(i.g[mu] + i.gamma[mu]);
    });
}

GridProfile dzbar(const GridProfile& u, int mu) {
    return index_scale(u, [mu](const SpecIndex& i) {
        return cplx(0.0, 0.5) * double(i.g[mu] - i.gamma[mu]);
    });
}

GridProfile dtheta(const GridProfile& u, int mu) {
    return index_scale(u, [mu](const SpecIndex& i) { return cplx(0.0, 1.0) * double(i.g[mu]); });
}

GridProfile conjugate(const GridProfile& u) {
    GridProfile out = u;
    out.coeffs.clear();
    for (const auto& [idx, f] : u.coeffs) {
        std::vector<MatC> g(f.size());
        for (size_t k = 0; k < f.size(); ++k) g[k] = f[k].conjugate();
        out.coeffs.emplace(idx.conjugated(), std::move(g));
    }
    return out;
}

MatC evaluate_z(const GridProfile& u, double t, double x, const std::vector<double>& theta,
                const std::vector<double>& r) {
    if (int(theta.size()) != u.m || int(r.size()) != u.m)
        throw ShapeMismatch("z has wrong dimension");
    if (t < -1e-12 || t > u.grid.T + 1e-12 || std::abs(x - u.grid.xbar) > u.grid.rho + 1e-12)
        throw OutsideDomain("evaluate_z: (t,x) outside the grid rectangle");
    MatC acc = MatC::Zero(u.rows, u.cols);
    for (const auto& [idx, f] : u.coeffs) {
        double ph = 0.0, damp = 0.0;
        for (int mu = 0; mu < u.m; ++mu) {
            ph += idx.g[mu] * theta[mu];
            damp += idx.gamma[mu] * r[mu];
        }
        if (damp > 46.0) continue;
        acc += u.coeff_at(idx, t, x) * (std::exp(cplx(0.0, 1.0) * ph) * std::exp(-damp));
    }
    return acc;
}

MatC evaluate_phase(const GridProfile& u, double t, double x, const PhaseFamily& phases,
                    double eps) {
    if (!(eps > 0)) throw OutsideDomain("evaluate_phase: eps must be positive");
    if (!u.grid.in_domain(t, x))
        throw OutsideDomain("evaluate_phase: (t,x) outside the domain of determinacy");
    std::vector<double> theta(u.m), r(u.m);
    for (int mu = 0; mu < u.m; ++mu) {
        const cplx ph = phases.reps[mu].phi(t, x);
        theta[mu] = ph.real() / eps;
        r[mu] = ph.imag() / eps;
    }
    return evaluate_z(u, t, x, theta, r);
}

TorusCoefficients coefficients_from_torus_samples(const std::vector<MatC>& samples, int m,
                                                  int P, int Q, bool oscillatory_filter,
                                                  double alias_tol) {
    TorusCoefficients out;
    const int Gp = (P - 1) / 2, Gq = (Q - 1) / 2;
    if (P < 3 || Q < 3) throw AliasingDetected("torus lattice too small");
    long total = 1;
    for (int d = 0; d < m; ++d) total *= long(P) * long(Q);
    if (long(samples.size()) != total)
        throw ShapeMismatch("torus sample count does not match lattice");
    const int rows = int(samples[0].rows()), cols = int(samples[0].cols());

    // enumerate all (g, gamma) with |g_mu| <= Gp, 0 <= gamma_mu <= Gq
    std::vector<int> g(m, 0), gamma(m, 0);
    std::map<SpecIndex, MatC> all;
    std::function<void(int)> rec = [&](int d) {
        if (d == 2 * m) {
            MatC acc = MatC::Zero(rows, cols);
            // iterate the lattice
            std::vector<int> jt(m, 0), jq(m, 0);
            std::function<void(int)> lat = [&](int e) {
                if (e == 2 * m) {
                    long flat = 0;
                    for (int a = 0; a < m; ++a) flat = flat * P + jt[a];
                    for (int a = 0; a < m; ++a) flat = flat * Q + jq[a];
                    double ph = 0.0;
                    for (int a = 0; a < m; ++a) {
                        ph -= g[a] * (2.0 * M_PI * jt[a] / P);
                        ph -= gamma[a] * (2.0 * M_PI * jq[a] / Q);
                    }
                    acc += samples[flat] * std::exp(cplx(0.0, 1.0) * ph);
                    return;
                }
                if (e < m)
                    for (jt[e] = 0; jt[e] < P; ++jt[e]) lat(e + 1);
                else
                    for (jq[e - m] = 0; jq[e - m] < Q; ++jq[e - m]) lat(e + 1);
            };
            lat(0);
            acc /= double(total);
            if (acc.cwiseAbs().maxCoeff() > 1e-14) all.emplace(SpecIndex(g, gamma), acc);
            return;
        }
        if (d < m)
            for (g[d] = -Gp; g[d] <= Gp; ++g[d]) rec(d + 1);
        else
            for (gamma[d - m] = 0; gamma[d - m] <= Gq; ++gamma[d - m]) rec(d + 1);
    };
    rec(0);

    // Nyquist-ring energy: content at the outermost representable indices
    double ring = 0.0, peak = 0.0;
    for (const auto& [idx, M] : all) {
        const double v = M.cwiseAbs().maxCoeff();
        peak = std::max(peak, v);
        bool on_ring = false;
        for (int a = 0; a < m; ++a)
            if (std::abs(idx.g[a]) == Gp || idx.gamma[a] == Gq) on_ring = true;
        if (on_ring) ring = std::max(ring, v);
    }
    if (peak > 0 && ring > alias_tol * peak)
        throw AliasingDetected("energy at the Nyquist ring: " + std::to_string(ring / peak));

    for (const auto& [idx, M] : all) {
        const bool admissible = oscillatory_filter ? idx.oscillatory() : idx.in_sigma();
        if (!admissible) {
            out.rejected.push_back(idx);
            out.rejected_mass += M.cwiseAbs().maxCoeff();
            continue;
        }
        out.coeffs.emplace(idx, M);
    }
    return out;
}

} // namespace cgo
