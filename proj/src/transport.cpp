#include "cgo/transport.hpp"

#include <cmath>

#include "cgo/errors.hpp"

namespace cgo {

// ---------------------------------------------------------------------------
// state algebra
// ---------------------------------------------------------------------------

RayState RayState::operator+(const RayState& o) const {
    RayState out = *this;
    out += o;
    return out;
}

RayState& RayState::operator+=(const RayState& o) {
    for (const auto& [idx, v] : o.c) {
        auto it = c.find(idx);
        if (it == c.end())
            c.emplace(idx, v);
        else
            it->second += v;
    }
    return *this;
}

RayState RayState::operator*(double s) const {
    RayState out = *this;
    for (auto& [idx, v] : out.c) v *= s;
    return out;
}

double RayState::norm2() const {
    double e = 0.0;
    for (const auto& [idx, v] : c) e += v.squaredNorm();
    return e;
}

double RayState::sup() const {
    double m = 0.0;
    for (const auto& [idx, v] : c) m = std::max(m, v.cwiseAbs().maxCoeff());
    return m;
}

RayState RayState::conjugated() const {
    RayState out;
    for (const auto& [idx, v] : c) out.c.emplace(idx.conjugated(), v.conjugate());
    return out;
}

void RayState::prune(double floor) {
    for (auto it = c.begin(); it != c.end();) {
        if (it->second.cwiseAbs().maxCoeff() <= floor)
            it = c.erase(it);
        else
            ++it;
    }
}

double state_distance(const RayState& a, const RayState& b) {
    double d = 0.0;
    for (const auto& [idx, v] : a.c) {
        auto it = b.c.find(idx);
        const double m = it == b.c.end() ? v.cwiseAbs().maxCoeff()
                                         : (v - it->second).cwiseAbs().maxCoeff();
        d = std::max(d, m);
    }
    for (const auto& [idx, v] : b.c)
        if (!a.c.count(idx)) d = std::max(d, v.cwiseAbs().maxCoeff());
    return d;
}

// ---------------------------------------------------------------------------
// context
// ---------------------------------------------------------------------------

TransportContext make_transport_context(const SystemModel& model, const Ray& ray,
                                        const PhaseOde& ode, int m, int G, double rect_tol) {
    TransportContext ctx;
    ctx.model = &model;
    ctx.ray = ray;
    ctx.mu = ray.mu;
    ctx.branch = ray.branch;
    ctx.m = m;
    ctx.G = G;
    ctx.T = model.T;
    ctx.rect_tol = rect_tol;
    // match the ray's stored resolution: path has 2*steps+1 nodes
    ctx.steps = (ray.path.size() - 1) / 2;

    const int H = ctx.half_nodes();
    const int N = model.N;
    ctx.pi.resize(H);
    ctx.xi.resize(H);
    ctx.dAdu.assign(N, std::vector<MatC>(H));
    ctx.dAdubar.assign(N, std::vector<MatC>(H));
    ctx.dFdu.resize(H);
    ctx.dFdubar.resize(H);
    ctx.du0dx.resize(H);
    const double hx = 1e-4 * model.rho;
    for (int j = 0; j < H; ++j) {
        const double t = ctx.t_half(j);
        const double x = ray.x_at(t);
        const EigenData ed = eig_decompose_point(model, t, x);
        ctx.pi[j] = ed.proj[ctx.branch];
        ctx.xi[j] = ode.xi.eval(t);
        for (int k = 0; k < N; ++k) {
            ctx.dAdu[k][j] = model.dA_du(k, t, x);
            ctx.dAdubar[k][j] = model.dA_dubar(k, t, x);
        }
        ctx.dFdu[j] = model.dF_du(t, x);
        ctx.dFdubar[j] = model.dF_dubar(t, x);
        ctx.du0dx[j] = model.du0_dx(t, x);
        const MatC Ap = model.A0(t, x + hx), Am = model.A0(t, x - hx);
        ctx.sup_dxA0 = std::max(ctx.sup_dxA0, ((Ap - Am) / (2 * hx)).norm());
        ctx.sup_xi = std::max(ctx.sup_xi, std::abs(ctx.xi[j]));
    }
    // d pi / dt along the ray by series slopes
    ctx.dpi.resize(H);
    {
        TimeSeries<MatC> s{0.0, ctx.T, ctx.pi};
        for (int j = 0; j < H; ++j) ctx.dpi[j] = s.slope(j);
    }
    // multiplicative (Euler) factorization of F for the semilinear case
    if (model.mode == Mode::Semilinear) {
        for (int i = 0; i < N; ++i) {
            for (const auto& mono : model.F[i].terms) {
                const int deg = mono.degree();
                if (deg == 0) continue;
                for (int k = 0; k < N; ++k) {
                    if (mono.a[k] > 0) {
                        TransportContext::EulerEntry e;
                        e.row = i;
                        e.col = k;
                        e.conj_col = false;
                        e.weight = double(mono.a[k]) / deg;
                        e.mono = mono;
                        e.mono.a[k] -= 1;
                        ctx.euler.push_back(e);
                    }
                    if (mono.b[k] > 0) {
                        TransportContext::EulerEntry e;
                        e.row = i;
                        e.col = k;
                        e.conj_col = true;
                        e.weight = double(mono.b[k]) / deg;
                        e.mono = mono;
                        e.mono.b[k] -= 1;
                        ctx.euler.push_back(e);
                    }
                }
            }
        }
    }
    return ctx;
}

RayState initial_profile(const TransportContext& ctx, const PhaseData& data, int zero_index) {
    const auto& zp = data.zeros.at(zero_index);
    const MatC pi0 = ctx.pi[0];
    const double defect = (pi0 * zp.h - zp.h).norm();
    if (defect > 1e-10 * std::max(1.0, zp.h.norm()))
        throw PolarizationViolated("initial amplitude not polarized on branch " +
                                   std::to_string(ctx.branch + 1));
    RayState H;
    H.c.emplace(SpecIndex::fundamental(ctx.m, ctx.mu), zp.h);
    return H;
}

// ---------------------------------------------------------------------------
// coefficient-space nonlinearity
// ---------------------------------------------------------------------------

namespace {

using ScalarState = std::map<SpecIndex, cplx>;
using MatState = std::map<SpecIndex, MatC>;

bool truncated(const SpecIndex& idx, int G) {
    for (int v : idx.gamma)
        if (v > G) return true;
    return false;
}

ScalarState scalar_component(const RayState& u, int k, bool conj) {
    ScalarState out;
    for (const auto& [idx, v] : u.c) {
        if (conj)
            out.emplace(idx.conjugated(), std::conj(v[k]));
        else
            out.emplace(idx, v[k]);
    }
    return out;
}

ScalarState scalar_convolve(const ScalarState& a, const ScalarState& b, int G) {
    ScalarState out;
    for (const auto& [i1, v1] : a)
        for (const auto& [i2, v2] : b) {
            SpecIndex idx = i1 + i2;
            if (truncated(idx, G)) continue;
            out[idx] += v1 * v2;
        }
    return out;
}

// B(t,V) as a matrix-valued state (quasilinear only); the only active phase
// gradient on this ray is xi(t) of its own mode.
MatState matrix_B(const TransportContext& ctx, int j, const RayState& V) {
    MatState out;
    const int N = ctx.model->N;
    const RayState Vc = V.conjugated();
    auto add = [&](const RayState& src, const std::vector<std::vector<MatC>>& dA) {
        for (const auto& [idx, v] : src.c) {
            MatC M = MatC::Zero(N, N);
            for (int k = 0; k < N; ++k) M += v[k] * dA[k][j];
            auto it = out.find(idx);
            if (it == out.end())
                out.emplace(idx, (ctx.xi[j] * M).eval());
            else
                it->second += ctx.xi[j] * M;
        }
    };
    add(V, ctx.dAdu);
    add(Vc, ctx.dAdubar);
    return out;
}

// CL(V), CR(V) for the semilinear multiplicative form F(U) = CL(V)U + CR(V)Ubar.
void matrix_CLR(const TransportContext& ctx, int j, const RayState& V, MatState& CL,
                MatState& CR) {
    const int N = ctx.model->N;
    const double t = ctx.t_half(j);
    const double x = ctx.ray.x_at(t);
    for (const auto& e : ctx.euler) {
        // evaluate the residual monomial on V in the coefficient algebra
        ScalarState acc;
        acc.emplace(SpecIndex::zero(ctx.m), cplx(1.0, 0.0));
        for (int k = 0; k < N; ++k) {
            for (int p = 0; p < e.mono.a[k]; ++p)
                acc = scalar_convolve(acc, scalar_component(V, k, false), ctx.G);
            for (int p = 0; p < e.mono.b[k]; ++p)
                acc = scalar_convolve(acc, scalar_component(V, k, true), ctx.G);
        }
        const cplx w = e.weight * e.mono.coeff(t, x);
        MatState& tgt = e.conj_col ? CR : CL;
        for (const auto& [idx, v] : acc) {
            auto it = tgt.find(idx);
            if (it == tgt.end()) it = tgt.emplace(idx, MatC::Zero(N, N)).first;
            it->second(e.row, e.col) += w * v;
        }
    }
}

RayState apply_mat_state(const MatState& M, const RayState& U, int G) {
    RayState out;
    for (const auto& [i1, Mv] : M)
        for (const auto& [i2, Uv] : U.c) {
            SpecIndex idx = i1 + i2;
            if (truncated(idx, G)) continue;
            auto it = out.c.find(idx);
            if (it == out.c.end())
                out.c.emplace(idx, (Mv * Uv).eval());
            else
                it->second += Mv * Uv;
        }
    return out;
}

RayState dtheta_state(const RayState& u, int mu) {
    RayState out = u;
    for (auto& [idx, v] : out.c) v *= cplx(0.0, double(idx.g[mu]));
    return out;
}

} // namespace

RayState transport_nonlinearity(const TransportContext& ctx, int j, const RayState& V,
                                const RayState& U) {
    RayState out;
    if (ctx.model->mode == Mode::Quasilinear) {
        // Burgers-type term B(V) dtheta_mu U
        const MatState B = matrix_B(ctx, j, V);
        out += apply_mat_state(B, dtheta_state(U, ctx.mu), ctx.G);
        // C U = (dA[U] + dAbar[Ubar]) du0/dx + dF U + dFbar Ubar (linear in U)
        const int N = ctx.model->N;
        const RayState Uc = U.conjugated();
        for (const auto& [idx, v] : U.c) {
            VecC add = ctx.dFdu[j] * v;
            MatC M = MatC::Zero(N, N);
            for (int k = 0; k < N; ++k) M += v[k] * ctx.dAdu[k][j];
            add += M * ctx.du0dx[j];
            auto it = out.c.find(idx);
            if (it == out.c.end())
                out.c.emplace(idx, add);
            else
                it->second += add;
        }
        for (const auto& [idx, v] : Uc.c) {
            VecC add = ctx.dFdubar[j] * v;
            MatC M = MatC::Zero(N, N);
            for (int k = 0; k < N; ++k) M += v[k] * ctx.dAdubar[k][j];
            add += M * ctx.du0dx[j];
            auto it = out.c.find(idx);
            if (it == out.c.end())
                out.c.emplace(idx, add);
            else
                it->second += add;
        }
    } else {
        MatState CL, CR;
        matrix_CLR(ctx, j, V, CL, CR);
        out += apply_mat_state(CL, U, ctx.G);
        out += apply_mat_state(CR, U.conjugated(), ctx.G);
    }
    return out;
}

RayState project_F(const TransportContext& ctx, int j, const RayState& s) {
    RayState out;
    for (const auto& [idx, v] : s.c) {
        if (idx.zero_g()) {
            ctx.rect_mass = std::max(ctx.rect_mass, v.cwiseAbs().maxCoeff());
            continue;
        }
        if (idx.sigma_mu() != ctx.mu) continue;
        if (truncated(idx, ctx.G)) continue;
        VecC pv = ctx.pi[j] * v;
        if (pv.cwiseAbs().maxCoeff() > 0.0) out.c.emplace(idx, pv);
    }
    return out;
}

// ---------------------------------------------------------------------------
// solvers
// ---------------------------------------------------------------------------

namespace {

RayState interp_state(const std::vector<RayState>& V, const TransportContext& ctx,
                      double t) {
    // V is stored at macro nodes; Hermite interpolation per coefficient
    const int n = int(V.size()) - 1;
    const double h = ctx.T / n;
    double u = t / h;
    int i = std::clamp(int(std::floor(u)), 0, n - 1);
    const double a = u - i;
    if (a == 0.0) return V[i];
    // collect the union of indices over the 4-node stencil
    RayState out;
    const int i0 = std::clamp(i - 1, 0, n), i1 = i, i2 = std::min(i + 1, n),
              i3 = std::min(i + 2, n);
    auto value = [&](const SpecIndex& idx, int k) -> VecC {
        auto it = V[k].c.find(idx);
        if (it != V[k].c.end()) return it->second;
        return VecC::Zero(ctx.model->N);
    };
    std::map<SpecIndex, bool> keys;
    for (int k : {i0, i1, i2, i3})
        for (const auto& [idx, v] : V[k].c) keys[idx] = true;
    for (const auto& [idx, flag] : keys) {
        const VecC y1 = value(idx, i1), y2 = value(idx, i2);
        const VecC m1 = (i1 > 0) ? ((y2 - value(idx, i0)) * 0.5).eval()
                                 : (y2 - y1);
        const VecC m2 = (i2 < n) ? ((value(idx, i3) - y1) * 0.5).eval()
                                 : (y2 - y1);
        const double a2 = a * a, a3 = a2 * a;
        VecC v = y1 * (2 * a3 - 3 * a2 + 1) + m1 * (a3 - 2 * a2 + a) +
                 y2 * (-2 * a3 + 3 * a2) + m2 * (a3 - a2);
        out.c.emplace(idx, v);
    }
    return out;
}

double estimate_C(const TransportContext& ctx, const std::vector<RayState>& V) {
    double nv = 0.0, ndv = 0.0;
    for (const auto& s : V) {
        double l1 = 0.0, l1g = 0.0;
        for (const auto& [idx, v] : s.c) {
            const double m = v.cwiseAbs().maxCoeff();
            int gsum = 0;
            for (int gv : idx.g) gsum += std::abs(gv);
            l1 += m;
            l1g += gsum * m;
        }
        nv = std::max(nv, l1);
        ndv = std::max(ndv, l1g);
    }
    const int N = ctx.model->N;
    double M0 = 0.0;
    if (ctx.model->mode == Mode::Quasilinear) {
        double dA = 0.0, dF = 0.0, du0 = 0.0;
        for (int j = 0; j < ctx.half_nodes(); ++j) {
            double s = 0.0;
            for (int k = 0; k < N; ++k)
                s += ctx.dAdu[k][j].norm() + ctx.dAdubar[k][j].norm();
            dA = std::max(dA, s);
            dF = std::max(dF, ctx.dFdu[j].norm() + ctx.dFdubar[j].norm());
            du0 = std::max(du0, ctx.du0dx[j].norm());
        }
        M0 = dA * ctx.sup_xi * (1.0 + ctx.G) + dF + dA * du0;
    } else {
        // Lipschitz envelope of the multiplicative form over the reachable ball
        double lip = 0.0;
        for (const auto& e : ctx.euler) {
            double cmax = 0.0;
            for (int j = 0; j < ctx.half_nodes(); ++j) {
                const double t = ctx.t_half(j);
                cmax = std::max(cmax, std::abs(e.mono.coeff(t, ctx.ray.x_at(t))));
            }
            lip += cmax * std::pow(std::max(1.0, nv), std::max(0, e.mono.degree() - 1));
        }
        M0 = lip * double(N);
    }
    // projector drift adds a bounded zero-order term
    double dpi = 0.0;
    for (const auto& M : ctx.dpi) dpi = std::max(dpi, M.norm());
    return 1.0 + ctx.sup_dxA0 + dpi + M0 * (nv + ndv);
}

} // namespace

LinearSolveResult linear_step_solve(const TransportContext& ctx,
                                    const std::vector<RayState>& V, const RayState& H,
                                    double slack) {
    const int n = ctx.steps;
    const double h = ctx.T / n;
    LinearSolveResult out;
    out.C_est = estimate_C(ctx, V);
    out.states.resize(n + 1);
    out.energy.resize(n + 1);
    RayState U = project_F(ctx, 0, H);
    out.states[0] = U;
    out.energy[0] = U.norm2();

    auto rhs = [&](int j, const RayState& Vj, const RayState& Uj) {
        RayState s = transport_nonlinearity(ctx, j, Vj, Uj);
        // lower-order projector drift pi (dpi/dt) U
        for (const auto& [idx, v] : Uj.c) {
            auto it = s.c.find(idx);
            const VecC add = ctx.dpi[j] * v;
            if (it == s.c.end())
                s.c.emplace(idx, add);
            else
                it->second += add;
        }
        return project_F(ctx, j, s) * -1.0;
    };

    for (int i = 0; i < n; ++i) {
        const int j0 = 2 * i, j1 = 2 * i + 1, j2 = 2 * i + 2;
        const RayState& Vj0 = V[i];
        const RayState Vmid = interp_state(V, ctx, ctx.t_half(j1));
        const RayState& Vj2 = V[i + 1];
        const RayState k1 = rhs(j0, Vj0, U);
        const RayState k2 = rhs(j1, Vmid, U + k1 * (0.5 * h));
        const RayState k3 = rhs(j1, Vmid, U + k2 * (0.5 * h));
        const RayState k4 = rhs(j2, Vj2, U + k3 * h);
        U += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        U = project_F(ctx, j2, U);
        U.prune(1e-300);
        out.states[i + 1] = U;
        out.energy[i + 1] = U.norm2();
        const double cap = slack * std::exp(out.C_est * ctx.t_half(j2)) * out.energy[0];
        if (out.energy[i + 1] > cap && out.energy[0] > 0.0)
            throw EnergyBlowup("transport energy " + std::to_string(out.energy[i + 1]) +
                               " exceeds the estimate envelope " + std::to_string(cap) +
                               " at t=" + std::to_string(ctx.t_half(j2)));
        if (out.energy[0] > 0.0)
            out.max_energy_ratio =
                std::max(out.max_energy_ratio,
                         out.energy[i + 1] /
                             (std::exp(out.C_est * ctx.t_half(j2)) * out.energy[0]));
    }
    return out;
}

std::vector<RayState> direct_solve(const TransportContext& ctx, const RayState& H) {
    const int n = ctx.steps;
    const double h = ctx.T / n;
    std::vector<RayState> out(n + 1);
    RayState U = project_F(ctx, 0, H);
    out[0] = U;
    auto rhs = [&](int j, const RayState& Uj) {
        RayState s = transport_nonlinearity(ctx, j, Uj, Uj);
        for (const auto& [idx, v] : Uj.c) {
            auto it = s.c.find(idx);
            const VecC add = ctx.dpi[j] * v;
            if (it == s.c.end())
                s.c.emplace(idx, add);
            else
                it->second += add;
        }
        return project_F(ctx, j, s) * -1.0;
    };
    for (int i = 0; i < n; ++i) {
        const int j0 = 2 * i, j1 = 2 * i + 1, j2 = 2 * i + 2;
        const RayState k1 = rhs(j0, U);
        const RayState k2 = rhs(j1, U + k1 * (0.5 * h));
        const RayState k3 = rhs(j1, U + k2 * (0.5 * h));
        const RayState k4 = rhs(j2, U + k3 * h);
        U += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        U = project_F(ctx, j2, U);
        U.prune(1e-300);
        out[i + 1] = U;
    }
    return out;
}

PicardResult picard_solve(const TransportContext& ctx, const RayState& H, double tol,
                          int nu_max) {
    TransportContext work = ctx;
    PicardResult out;
    for (int attempt = 0; attempt <= 6; ++attempt) {
        out.T_effective = work.T;
        out.halvings = attempt;
        out.deltas.clear();
        std::vector<RayState> V(work.steps + 1, project_F(work, 0, H)); // U_1 = H
        LinearSolveResult last;
        bool converged = false;
        int rising = 0;
        bool diverged = false;
        for (int nu = 2; nu <= nu_max; ++nu) {
            last = linear_step_solve(work, V, H);
            double delta = 0.0;
            for (size_t i = 0; i < V.size(); ++i)
                delta = std::max(delta, state_distance(V[i], last.states[i]));
            out.deltas.push_back(delta);
            out.iterations = nu;
            V = last.states;
            if (delta <= tol) {
                converged = true;
                break;
            }
            const size_t d = out.deltas.size();
            if (d >= 2 && out.deltas[d - 1] >= out.deltas[d - 2]) {
                if (++rising >= 3) {
                    diverged = true;
                    break;
                }
            } else {
                rising = 0;
            }
        }
        if (converged) {
            out.states = V;
            out.C_est = last.C_est;
            out.max_energy_ratio = last.max_energy_ratio;
            out.rect_mass = work.rect_mass;
            if (work.rect_mass > work.rect_tol)
                throw RectificationDetected(
                    "non-oscillatory mass " + std::to_string(work.rect_mass) +
                    " generated by the nonlinearity (rect_tol exceeded)");
            // cross-check against the direct nonlinear integration
            const auto D = direct_solve(work, H);
            double diff = 0.0;
            for (size_t i = 0; i < V.size(); ++i)
                diff = std::max(diff, state_distance(V[i], D[i]));
            out.direct_diff = diff;
            return out;
        }
        if (!diverged && !converged)
            throw NoContraction("Picard iteration did not converge in " +
                                std::to_string(nu_max) + " iterations");
        // halve the time horizon and retry (local existence time)
        work.T *= 0.5;
        work.steps = std::max(4, work.steps / 2);
        // contexts are sampled uniformly; halving keeps node alignment:
        // t_half(j) covers [0, T/2] with the same spacing
    }
    throw NoContraction("Picard iteration failed after repeated T halving");
}

ChartProfile extend_off_ray(const TransportContext& ctx, const std::vector<RayState>& states) {
    ChartProfile out;
    out.mu = ctx.mu;
    out.ell = ctx.ray.ell;
    out.s0 = ctx.ray.s0;
    out.t0 = 0.0;
    out.t1 = ctx.T;
    out.n_nodes = int(states.size());
    out.path = ctx.ray.path;
    const int N = ctx.model->N;
    // collect the union of indices
    std::map<SpecIndex, bool> keys;
    for (const auto& s : states)
        for (const auto& [idx, v] : s.c) keys[idx] = true;
    for (const auto& [idx, flag] : keys) {
        ChartField f;
        f.rows = N;
        f.cols = 1;
        ChartTerm term;
        term.wa = 1; // the chart cutoff
        term.poly.assign(1, std::vector<MatC>(out.n_nodes));
        for (int k = 0; k < out.n_nodes; ++k) {
            auto it = states[k].c.find(idx);
            term.poly[0][k] =
                (it != states[k].c.end()) ? MatC(it->second) : MatC(VecC::Zero(N));
        }
        f.terms.push_back(std::move(term));
        out.comp.emplace(idx, std::move(f));
    }
    return out;
}

PeriodicState j_map(const RayState& u) {
    PeriodicState out;
    out.c = u.c;
    return out;
}

RayState j_inverse(const PeriodicState& u) {
    RayState out;
    for (const auto& [idx, v] : u.c) {
        if (!idx.oscillatory()) continue; // the projector onto j PC_osc
        out.c.emplace(idx, v);
    }
    return out;
}

} // namespace cgo
