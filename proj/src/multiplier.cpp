#include "cgo/multiplier.hpp"

#include <cmath>
#include <random>

#include "cgo/errors.hpp"

namespace cgo {

namespace {

// 5-point finite differences of the projector field across the ray (the
// fields are bump-free and smooth, so plain stencils are clean here).
void pi_taylor(const SystemModel& model, int branch, double t, double xr, double h,
               MatC& p0, MatC& p1, MatC& p2) {
    auto P = [&](double s) { return eig_decompose_point(model, t, xr + s).proj[branch]; };
    const MatC m2 = P(-2 * h), m1 = P(-h), z = P(0.0), q1 = P(h), q2 = P(2 * h);
    p0 = z;
    p1 = (m2 - 8.0 * m1 + 8.0 * q1 - q2) / (12.0 * h);
    p2 = 0.5 * (-m2 + 16.0 * m1 - 30.0 * z + 16.0 * q1 - q2) / (12.0 * h * h);
}

} // namespace

MultiplierSetup make_multiplier_setup(const SystemModel& model, const PhaseFamily& phases,
                                      const MultiplierOptions& opt) {
    MultiplierSetup setup;
    setup.model = &model;
    setup.phases = &phases;
    setup.opt = opt;
    setup.delta_gap = std::numeric_limits<double>::infinity();
    setup.min_xi = std::numeric_limits<double>::infinity();

    for (const auto& rep : phases.reps) {
        for (size_t l = 0; l < rep.rays.size(); ++l) {
            const Ray& ray = rep.rays[l];
            ChartOpData cd;
            cd.mu = rep.mu;
            cd.branch = rep.branch;
            cd.ell = int(l);
            cd.s0 = ray.s0;
            cd.T = model.T;
            cd.n_nodes = 201;
            cd.path = ray.path;
            const double hs = opt.pi_fd_step > 0 ? opt.pi_fd_step : ray.s0 / 8.0;
            cd.pi0.resize(cd.n_nodes);
            cd.pi1.resize(cd.n_nodes);
            cd.pi2.resize(cd.n_nodes);
            cd.proj.resize(cd.n_nodes);
            cd.lambda.resize(cd.n_nodes);
            cd.xi.resize(cd.n_nodes);
            for (int i = 0; i < cd.n_nodes; ++i) {
                const double t = cd.node_t(i);
                const double xr = ray.x_at(t);
                pi_taylor(model, cd.branch, t, xr, hs, cd.pi0[i], cd.pi1[i], cd.pi2[i]);
                const EigenData ed = eig_decompose_point(model, t, xr);
                cd.proj[i] = ed.proj;
                cd.lambda[i] = ed.lambda;
                cd.xi[i] = rep.odes[l].xi.eval(t);
                for (int b = 0; b + 1 < model.N; ++b)
                    setup.delta_gap = std::min(setup.delta_gap, ed.lambda[b + 1] - ed.lambda[b]);
                setup.min_xi = std::min(setup.min_xi, std::abs(cd.xi[i]));
            }
            setup.charts.push_back(std::move(cd));
        }
    }
    return setup;
}

namespace {

// E coefficient at one point for indices in Sigma_mu of a given chart.
MatC E_chart_coeff(const MultiplierSetup& setup, const ChartOpData& cd, double t, double x) {
    const double s = x - cd.path.eval(t);
    const Bump b{cd.s0};
    const double w = b.value(s);
    if (w == 0.0) return MatC::Zero(setup.model->N, setup.model->N);
    if (setup.opt.e_rep == "fullfield")
        return w * eig_decompose_point(*setup.model, t, x).proj[cd.branch];
    const MatC p0 = sampled_eval(cd.pi0, 0.0, cd.T, t);
    const MatC p1 = sampled_eval(cd.pi1, 0.0, cd.T, t);
    const MatC p2 = sampled_eval(cd.pi2, 0.0, cd.T, t);
    return w * (p0 + s * p1 + s * s * p2);
}

// On-ray transversal phase derivatives V_l Psi for one chart/index.
std::vector<cplx> transversal_VPsi(const MultiplierSetup& setup, const ChartOpData& cd,
                                   const SpecIndex& idx, double t) {
    const double xr = cd.path.eval(t);
    const cplx dt = setup.phases->dPsi_dt(idx.g, idx.gamma, t, xr);
    const cplx dx = setup.phases->dPsi_dx(idx.g, idx.gamma, t, xr);
    const EigenData ed = eig_decompose_point(*setup.model, t, xr);
    std::vector<cplx> out(setup.model->N);
    for (int l = 0; l < setup.model->N; ++l) out[l] = dt + ed.lambda[l] * dx;
    return out;
}

} // namespace

FourierMultiplier build_P(const MultiplierSetup& setup) {
    FourierMultiplier M;
    M.tag = "P";
    M.k = -1;
    M.N = setup.model->N;
    const SystemModel* model = setup.model;
    const PhaseFamily* phases = setup.phases;
    M.coeff = [model, phases](const SpecIndex& idx, double t, double x) {
        const cplx tau = phases->dPsi_dt(idx.g, idx.gamma, t, x);
        const cplx xi = phases->dPsi_dx(idx.g, idx.gamma, t, x);
        const MatC A0 = model->A0(t, x);
        return (cplx(0, 1) * (tau * MatC::Identity(model->N, model->N) + xi * A0)).eval();
    };
    return M;
}

FourierMultiplier build_E(const MultiplierSetup& setup) {
    FourierMultiplier M;
    M.tag = "E";
    M.k = 2;
    M.N = setup.model->N;
    const MultiplierSetup* S = &setup;
    M.coeff = [S](const SpecIndex& idx, double t, double x) {
        const int N = S->model->N;
        const int mu = idx.sigma_mu();
        if (mu < 0 || !idx.oscillatory())
            return S->opt.e_outside == "identity" ? MatC(MatC::Identity(N, N))
                                                  : MatC(MatC::Zero(N, N));
        MatC out = MatC::Zero(N, N);
        for (const auto& cd : S->charts)
            if (cd.mu == mu) out += E_chart_coeff(*S, cd, t, x);
        return out;
    };
    return M;
}

FourierMultiplier build_Q(const MultiplierSetup& setup, double* C_min) {
    // certify the separation margin once per build
    double cmin = std::numeric_limits<double>::infinity();
    for (const auto& cd : setup.charts) {
        SpecIndex e = SpecIndex::fundamental(setup.phases->m(), cd.mu);
        for (int i = 0; i < cd.n_nodes; i += 8) {
            const double t = cd.node_t(i);
            for (int gmul = 1; gmul <= setup.opt.G; ++gmul) {
                SpecIndex idx = e;
                idx.g[cd.mu] = gmul;
                idx.gamma[cd.mu] = gmul;
                const auto V = transversal_VPsi(setup, cd, idx, t);
                for (int l = 0; l < setup.model->N; ++l) {
                    if (l == cd.branch) continue;
                    const double margin =
                        setup.delta_gap * std::abs(double(gmul)) * setup.min_xi / 2.0;
                    if (std::abs(V[l]) < margin)
                        throw SmallDivisor("transversal phase derivative " +
                                           std::to_string(std::abs(V[l])) +
                                           " below margin " + std::to_string(margin));
                    cmin = std::min(cmin, std::abs(V[l]));
                }
            }
        }
    }
    if (C_min) *C_min = cmin;

    FourierMultiplier M;
    M.tag = "Q";
    M.k = 0;
    M.N = setup.model->N;
    const MultiplierSetup* S = &setup;
    M.coeff = [S](const SpecIndex& idx, double t, double x) {
        const int N = S->model->N;
        const int mu = idx.sigma_mu();
        MatC out = MatC::Zero(N, N);
        if (mu < 0 || !idx.oscillatory()) return out;
        for (const auto& cd : S->charts) {
            if (cd.mu != mu) continue;
            const double s = x - cd.path.eval(t);
            const Bump b{cd.s0};
            const double w = b.value(s);
            if (w == 0.0) continue;
            // frozen on-ray value (k = 0 representative)
            const auto V = transversal_VPsi(*S, cd, idx, t);
            const EigenData ed = eig_decompose_point(*S->model, t, cd.path.eval(t));
            MatC Q = MatC::Zero(N, N);
            for (int l = 0; l < N; ++l) {
                if (l == cd.branch) continue;
                Q += ed.proj[l] / V[l];
            }
            out += w * (cplx(0, -1) * Q);
        }
        return out;
    };
    return M;
}

GridProfile apply(const FourierMultiplier& M, const GridProfile& u) {
    if (u.rows != M.N) throw ShapeMismatch("multiplier dimension mismatch");
    GridProfile out = u;
    for (auto& [idx, f] : out.coeffs) {
        for (int i = 0; i < u.grid.nt; ++i)
            for (int j = 0; j < u.grid.nx; ++j) {
                const int k = out.node(i, j);
                f[k] = M.coeff(idx, u.grid.t(i), u.grid.x(j)) * f[k];
            }
    }
    return out;
}

ChartProfile apply_E_chart(const MultiplierSetup& setup, const ChartProfile& u) {
    // locate the chart data for this ray
    const ChartOpData* cd = nullptr;
    for (const auto& c : setup.charts)
        if (c.mu == u.mu && c.ell == u.ell) cd = &c;
    if (!cd) throw AlgebraError("chart not registered with the multiplier setup");
    ChartProfile out = chart_like(u);
    // degree-2 Taylor representative on the chart's own time nodes
    MatPoly P;
    P.c.assign(3, std::vector<MatC>(u.n_nodes));
    for (int i = 0; i < u.n_nodes; ++i) {
        const double t = u.node_t(i);
        P.c[0][i] = sampled_eval(cd->pi0, 0.0, cd->T, t);
        P.c[1][i] = sampled_eval(cd->pi1, 0.0, cd->T, t);
        P.c[2][i] = sampled_eval(cd->pi2, 0.0, cd->T, t);
    }
    for (const auto& [idx, f] : u.comp) {
        if (idx.sigma_mu() != u.mu) continue; // supported away from this chart
        out.comp.emplace(idx, cf_mul_bump(cf_apply_poly(P, f, u.n_nodes), 1));
    }
    return out;
}

ChartProfile apply_Q_chart(const MultiplierSetup& setup, const ChartProfile& u) {
    const ChartOpData* cd = nullptr;
    for (const auto& c : setup.charts)
        if (c.mu == u.mu && c.ell == u.ell) cd = &c;
    if (!cd) throw AlgebraError("chart not registered with the multiplier setup");
    ChartProfile out = chart_like(u);
    const int N = setup.model->N;
    for (const auto& [idx, f] : u.comp) {
        if (idx.sigma_mu() != u.mu) continue;
        MatPoly P;
        P.c.assign(1, std::vector<MatC>(u.n_nodes));
        for (int i = 0; i < u.n_nodes; ++i) {
            const double t = u.node_t(i);
            const auto V = transversal_VPsi(setup, *cd, idx, t);
            const EigenData ed = eig_decompose_point(*setup.model, t, cd->path.eval(t));
            MatC Q = MatC::Zero(N, N);
            for (int l = 0; l < N; ++l) {
                if (l == cd->branch) continue;
                Q += ed.proj[l] / V[l];
            }
            P.c[0][i] = cplx(0, -1) * Q;
        }
        out.comp.emplace(idx, cf_mul_bump(cf_apply_poly(P, f, u.n_nodes), 1));
    }
    return out;
}

std::map<SpecIndex, VecC> random_test_profile(int m, int N, int G, unsigned long long seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::map<SpecIndex, VecC> out;
    // keep the enumeration budget modest for several phases
    const int Geff = (m >= 2) ? std::min(G, 4) : G;
    for (const auto& idx : enumerate_sigma_osc(m, Geff)) {
        VecC v(N);
        for (int k = 0; k < N; ++k) v[k] = cplx(gauss(rng), gauss(rng));
        v *= std::pow(1.0 + idx.order(), -8.0);
        out.emplace(idx, v);
    }
    return out;
}

std::string identity_label(IdentityKind k) {
    switch (k) {
        case IdentityKind::EE: return "EE-E";
        case IdentityKind::PE: return "PE";
        case IdentityKind::EP: return "EP";
        case IdentityKind::PQ: return "PQ-(I-E)";
        case IdentityKind::QP: return "QP-(I-E)";
    }
    return "?";
}

namespace {

// Per-point cache for the sweep loop: phases once per mode, chart geometry and
// on-ray series once per chart.
struct SweepPointCache {
    double t = 0, x = 0;
    MatC A0, Id;
    std::vector<cplx> phi, dphit, dphix; // per mode
    struct ChartHit {
        const ChartOpData* cd = nullptr;
        double s = 0, w = 0;
        MatC piT;              // Taylor-2 projector value at (t, s)
        std::vector<MatC> proj; // all projectors on the ray at t
        VecD lambda;            // eigenvalues on the ray at t
        double xi = 0;
    };
    std::vector<ChartHit> hits; // charts with nonzero cutoff
};

SweepPointCache make_point_cache(const MultiplierSetup& setup, double t, double x) {
    SweepPointCache c;
    c.t = t;
    c.x = x;
    const int N = setup.model->N;
    c.A0 = setup.model->A0(t, x);
    c.Id = MatC::Identity(N, N);
    const int m = setup.phases->m();
    c.phi.resize(m);
    c.dphit.resize(m);
    c.dphix.resize(m);
    for (int mu = 0; mu < m; ++mu) {
        c.phi[mu] = setup.phases->reps[mu].phi(t, x);
        c.dphit[mu] = setup.phases->reps[mu].dphi_dt(t, x);
        c.dphix[mu] = setup.phases->reps[mu].dphi_dx(t, x);
    }
    for (const auto& cd : setup.charts) {
        const double s = x - cd.path.eval(t);
        const Bump b{cd.s0};
        const double w = b.value(s);
        if (w == 0.0) continue;
        SweepPointCache::ChartHit hit;
        hit.cd = &cd;
        hit.s = s;
        hit.w = w;
        if (setup.opt.e_rep == "fullfield") {
            hit.piT = eig_decompose_point(*setup.model, t, x).proj[cd.branch];
        } else {
            hit.piT = sampled_eval(cd.pi0, 0.0, cd.T, t) +
                      s * sampled_eval(cd.pi1, 0.0, cd.T, t) +
                      s * s * sampled_eval(cd.pi2, 0.0, cd.T, t);
        }
        hit.lambda = sampled_eval(cd.lambda, 0.0, cd.T, t);
        hit.proj.resize(N);
        std::vector<MatC> tmp(cd.n_nodes);
        for (int l = 0; l < N; ++l) {
            for (int i = 0; i < cd.n_nodes; ++i) tmp[i] = cd.proj[i][l];
            hit.proj[l] = sampled_eval(tmp, 0.0, cd.T, t);
        }
        hit.xi = sampled_eval(cd.xi, 0.0, cd.T, t);
        c.hits.push_back(std::move(hit));
    }
    return c;
}

// coefficients of E, Q, sigma(dPsi) at one cached point
MatC cached_E(const MultiplierSetup& setup, const SweepPointCache& c, const SpecIndex& idx) {
    const int N = setup.model->N;
    const int mu = idx.sigma_mu();
    if (mu < 0 || !idx.oscillatory())
        return setup.opt.e_outside == "identity" ? MatC(c.Id) : MatC(MatC::Zero(N, N));
    MatC out = MatC::Zero(N, N);
    for (const auto& h : c.hits)
        if (h.cd->mu == mu) out += h.w * h.piT;
    return out;
}

MatC cached_Q(const MultiplierSetup& setup, const SweepPointCache& c, const SpecIndex& idx) {
    const int N = setup.model->N;
    MatC out = MatC::Zero(N, N);
    const int mu = idx.sigma_mu();
    if (mu < 0 || !idx.oscillatory()) return out;
    for (const auto& h : c.hits) {
        if (h.cd->mu != mu) continue;
        // on-ray transversal derivative: V_l Psi = g_mu (lambda_l - lambda_mu) xi
        MatC Q = MatC::Zero(N, N);
        for (int l = 0; l < N; ++l) {
            if (l == h.cd->branch) continue;
            const cplx Vl = double(idx.g[mu]) * (h.lambda[l] - h.lambda[h.cd->branch]) * h.xi;
            Q += h.proj[l] / Vl;
        }
        out += h.w * (cplx(0, -1) * Q);
    }
    return out;
}

MatC cached_sigma(const SweepPointCache& c, const SpecIndex& idx) {
    cplx tau(0, 0), xi(0, 0);
    for (size_t mu = 0; mu < c.phi.size(); ++mu) {
        if (idx.g[mu] == 0 && idx.gamma[mu] == 0) continue;
        tau += cplx(double(idx.g[mu]) * c.dphit[mu].real(),
                    double(idx.gamma[mu]) * c.dphit[mu].imag());
        xi += cplx(double(idx.g[mu]) * c.dphix[mu].real(),
                   double(idx.gamma[mu]) * c.dphix[mu].imag());
    }
    return cplx(0, 1) * (tau * c.Id + xi * c.A0);
}

} // namespace

DefectSweep identity_sweep(const MultiplierSetup& setup, IdentityKind kind,
                           const std::map<SpecIndex, VecC>& test, const EvalSet& pts,
                           const std::vector<double>& eps) {
    const int N = setup.model->N;
    DefectSweep out;
    out.label = identity_label(kind);
    out.eps = eps;
    out.sup.assign(eps.size(), 0.0);

    for (const auto& pt : pts.pts) {
        const SweepPointCache c = make_point_cache(setup, pt.t, pt.x);
        for (const auto& [idx, tv] : test) {
            MatC D;
            switch (kind) {
                case IdentityKind::EE: {
                    const MatC e = cached_E(setup, c, idx);
                    D = e * e - e;
                    break;
                }
                case IdentityKind::PE:
                    D = cached_sigma(c, idx) * cached_E(setup, c, idx);
                    break;
                case IdentityKind::EP:
                    D = cached_E(setup, c, idx) * cached_sigma(c, idx);
                    break;
                case IdentityKind::PQ:
                    D = cached_sigma(c, idx) * cached_Q(setup, c, idx) -
                        (MatC::Identity(N, N) - cached_E(setup, c, idx));
                    break;
                case IdentityKind::QP:
                    D = cached_Q(setup, c, idx) * cached_sigma(c, idx) -
                        (MatC::Identity(N, N) - cached_E(setup, c, idx));
                    break;
            }
            const double mag = (D * tv).cwiseAbs().maxCoeff();
            if (mag == 0.0) continue;
            double ImPsi = 0.0;
            for (size_t mu = 0; mu < c.phi.size(); ++mu)
                ImPsi += double(idx.gamma[mu]) * c.phi[mu].imag();
            for (size_t e = 0; e < eps.size(); ++e) {
                const double damp = ImPsi / eps[e];
                if (damp > 46.0) continue;
                out.sup[e] = std::max(out.sup[e], mag * std::exp(-damp));
            }
        }
    }
    return out;
}

DefectSweep class_stability_sweep(const MultiplierSetup& setup, int k, double amplitude,
                                  const std::map<SpecIndex, VecC>& test, const EvalSet& pts,
                                  const std::vector<double>& eps, unsigned long long seed) {
    const int N = setup.model->N;
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    MatC D(N, N);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) D(i, j) = cplx(gauss(rng), gauss(rng));
    D /= std::max(1.0, D.norm());

    DefectSweep out;
    out.label = "class-k" + std::to_string(k);
    out.eps = eps;
    out.sup.assign(eps.size(), 0.0);
    for (const auto& pt : pts.pts) {
        for (const auto& [idx, tv] : test) {
            const int mu = idx.sigma_mu();
            if (mu < 0) continue;
            double pert = 0.0;
            for (const auto& cd : setup.charts) {
                if (cd.mu != mu) continue;
                const double s = pt.x - cd.path.eval(pt.t);
                const Bump b{cd.s0};
                pert += amplitude * std::pow(s, k + 1) * b.value(s);
            }
            if (pert == 0.0) continue;
            const double mag = (pert * D * tv).cwiseAbs().maxCoeff();
            const cplx Psi = setup.phases->Psi(idx.g, idx.gamma, pt.t, pt.x);
            for (size_t e = 0; e < eps.size(); ++e) {
                const double damp = Psi.imag() / eps[e];
                if (damp > 46.0) continue;
                out.sup[e] = std::max(out.sup[e], mag * std::exp(-damp));
            }
        }
    }
    return out;
}

CoherenceReport check_coherence(const MultiplierSetup& setup, double tol) {
    CoherenceReport rep;
    const int N = setup.model->N;
    for (const auto& cd : setup.charts) {
        for (int i = 0; i < cd.n_nodes; i += 4) {
            const double t = cd.node_t(i);
            const double xr = cd.path.eval(t);
            for (int g = 1; g <= setup.opt.G; ++g) {
                SpecIndex idx = SpecIndex::fundamental(setup.phases->m(), cd.mu);
                idx.g[cd.mu] = g;
                idx.gamma[cd.mu] = g;
                const cplx tau = setup.phases->dPsi_dt(idx.g, idx.gamma, t, xr);
                const cplx xi = setup.phases->dPsi_dx(idx.g, idx.gamma, t, xr);
                const MatC sig =
                    cplx(0, 1) * (tau * MatC::Identity(N, N) + xi * setup.model->A0(t, xr));
                const double det = std::abs(sig.determinant());
                rep.max_scaled_det =
                    std::max(rep.max_scaled_det, det / std::pow(idx.order(), N));
            }
        }
    }
    rep.pass = rep.max_scaled_det <= tol;
    return rep;
}

SeparationReport check_separation(const MultiplierSetup& setup) {
    SeparationReport rep;
    rep.C_min = std::numeric_limits<double>::infinity();
    for (const auto& cd : setup.charts) {
        for (int i = 0; i < cd.n_nodes; i += 2) {
            const double t = cd.node_t(i);
            for (int g = 1; g <= setup.opt.G; ++g) {
                SpecIndex idx = SpecIndex::fundamental(setup.phases->m(), cd.mu);
                idx.g[cd.mu] = g;
                idx.gamma[cd.mu] = g;
                const auto V = transversal_VPsi(setup, cd, idx, t);
                for (int l = 0; l < setup.model->N; ++l) {
                    if (l == cd.branch) continue;
                    rep.C_min = std::min(rep.C_min, std::abs(V[l]));
                }
            }
        }
    }
    rep.bound = 0.9 * setup.delta_gap * setup.min_xi;
    rep.pass = rep.C_min >= rep.bound;
    return rep;
}

} // namespace cgo
