#include "cgo/assembler.hpp"

#include <cmath>

#include "cgo/errors.hpp"

namespace cgo {

namespace {

// 5-point s-Taylor (value, d/ds, d2/ds2 / 2) of a smooth matrix field along the chart.
MatPoly taylor2_along(const std::function<MatC(double, double)>& f, const ChartProfile& proto,
                      double hs) {
    MatPoly P;
    P.c.assign(3, std::vector<MatC>(proto.n_nodes));
    for (int i = 0; i < proto.n_nodes; ++i) {
        const double t = proto.node_t(i);
        const double xr = proto.path.eval(t);
        const MatC m2 = f(t, xr - 2 * hs), m1 = f(t, xr - hs), z = f(t, xr),
                   q1 = f(t, xr + hs), q2 = f(t, xr + 2 * hs);
        P.c[0][i] = z;
        P.c[1][i] = (m2 - 8.0 * m1 + 8.0 * q1 - q2) / (12.0 * hs);
        P.c[2][i] = 0.5 * (-m2 + 16.0 * m1 - 30.0 * z + 16.0 * q1 - q2) / (12.0 * hs * hs);
    }
    return P;
}

ChartField poly_as_field(const MatPoly& P) {
    ChartField f;
    f.rows = int(P.c[0][0].rows());
    f.cols = int(P.c[0][0].cols());
    f.terms.push_back(ChartTerm{P.c, 0, 0, 0});
    return f;
}

// scalar component k of a vector-valued chart profile
ChartProfile component(const ChartProfile& u, int k, bool conj) {
    ChartProfile out = chart_like(u);
    for (const auto& [idx, f] : u.comp) {
        ChartField g;
        g.rows = 1;
        g.cols = 1;
        for (const auto& term : f.terms) {
            ChartTerm t;
            t.wa = term.wa;
            t.wb = term.wb;
            t.wc = term.wc;
            t.poly.resize(term.poly.size());
            for (size_t j = 0; j < term.poly.size(); ++j) {
                t.poly[j].resize(term.poly[j].size());
                for (size_t n = 0; n < term.poly[j].size(); ++n) {
                    MatC v(1, 1);
                    v(0, 0) = conj ? std::conj(term.poly[j][n](k, 0)) : term.poly[j][n](k, 0);
                    t.poly[j][n] = v;
                }
            }
            g.terms.push_back(std::move(t));
        }
        out.comp.emplace(conj ? idx.conjugated() : idx, std::move(g));
    }
    return out;
}

// matrix-valued profile D(V) = sum_k T2[dA/du_k] * V_k (and the conjugate version)
ChartProfile differential_profile(const std::vector<MatPoly>& dA, const ChartProfile& V,
                                  bool conj) {
    ChartProfile out = chart_like(V);
    const int N = int(dA.size());
    for (int k = 0; k < N; ++k) {
        ChartProfile comp_k = component(V, k, conj);
        for (auto& [idx, f] : comp_k.comp) {
            ChartField Mf = cf_apply_poly(dA[k], f, V.n_nodes);
            auto it = out.comp.find(idx);
            if (it == out.comp.end())
                out.comp.emplace(idx, std::move(Mf));
            else
                it->second = cf_add(it->second, Mf);
        }
    }
    return out;
}

ChartProfile apply_poly_profile(const MatPoly& M, const ChartProfile& u) {
    ChartProfile out = chart_like(u);
    for (const auto& [idx, f] : u.comp) out.comp.emplace(idx, cf_apply_poly(M, f, u.n_nodes));
    return out;
}

ChartProfile scalar_poly_times(const MatPoly& s, const ChartProfile& u) {
    return apply_poly_profile(s, u); // 1x1 lhs broadcasts
}

ChartField embed_row(const ChartField& scalar, int row, int N) {
    ChartField out;
    out.rows = N;
    out.cols = 1;
    for (const auto& term : scalar.terms) {
        ChartTerm t;
        t.wa = term.wa;
        t.wb = term.wb;
        t.wc = term.wc;
        t.poly.resize(term.poly.size());
        for (size_t j = 0; j < term.poly.size(); ++j) {
            t.poly[j].resize(term.poly[j].size());
            for (size_t n = 0; n < term.poly[j].size(); ++n) {
                MatC v = MatC::Zero(N, 1);
                v(row, 0) = term.poly[j][n](0, 0);
                t.poly[j][n] = v;
            }
        }
        out.terms.push_back(std::move(t));
    }
    return out;
}

} // namespace

ChartModelData make_chart_model_data(const SystemModel& model, const PhaseRep& rep, int ell,
                                     const ChartProfile& proto) {
    ChartModelData cmd;
    const double hs = proto.s0 / 8.0;
    const int N = model.N;
    cmd.A0 = taylor2_along([&](double t, double x) { return model.A0(t, x); }, proto, hs);
    cmd.dFdu = taylor2_along([&](double t, double x) { return model.dF_du(t, x); }, proto, hs);
    cmd.dFdubar =
        taylor2_along([&](double t, double x) { return model.dF_dubar(t, x); }, proto, hs);
    cmd.du0dx = taylor2_along(
        [&](double t, double x) { return MatC(model.du0_dx(t, x)); }, proto, hs);
    for (int k = 0; k < N; ++k) {
        cmd.dAdu.push_back(taylor2_along(
            [&, k](double t, double x) { return model.dA_du(k, t, x); }, proto, hs));
        cmd.dAdubar.push_back(taylor2_along(
            [&, k](double t, double x) { return model.dA_dubar(k, t, x); }, proto, hs));
    }
    // chart gradient of the phase: xi(t) + Phi(t) s (the chart quadratic)
    cmd.dphix.c.assign(2, std::vector<MatC>(proto.n_nodes, MatC(1, 1)));
    cmd.dphix_conj.c.assign(2, std::vector<MatC>(proto.n_nodes, MatC(1, 1)));
    for (int i = 0; i < proto.n_nodes; ++i) {
        const double t = proto.node_t(i);
        const cplx xi = rep.odes[ell].xi.eval(t);
        const cplx Phi = rep.odes[ell].Phi.eval(t);
        cmd.dphix.c[0][i](0, 0) = xi;
        cmd.dphix.c[1][i](0, 0) = Phi;
        cmd.dphix_conj.c[0][i](0, 0) = std::conj(xi);
        cmd.dphix_conj.c[1][i](0, 0) = std::conj(Phi);
    }
    // semilinear monomial coefficients along the chart
    if (model.mode == Mode::Semilinear) {
        for (const auto& Fi : model.F)
            for (const auto& mono : Fi.terms) {
                cmd.Fcoeff.push_back(taylor2_along(
                    [&](double t, double x) {
                        MatC v(1, 1);
                        v(0, 0) = mono.coeff(t, x);
                        return v;
                    },
                    proto, hs));
            }
    }
    return cmd;
}

BuildNResult build_N_chart(const SystemModel& model, const ChartModelData& cmd,
                           const ChartProfile& U0, int G) {
    BuildNResult out;
    const int mu = U0.mu;
    const int N = model.N;

    // principal part L0 U0 = d_t U0 + A0 d_x U0
    ChartProfile NL = cp_add(cp_dt(U0), apply_poly_profile(cmd.A0, cp_dx(U0)));

    if (model.mode == Mode::Quasilinear) {
        const ChartProfile Du = differential_profile(cmd.dAdu, U0, false);
        const ChartProfile Dubar = differential_profile(cmd.dAdubar, U0, true);
        const ChartProfile dzU = cp_index_scale(U0, [mu](const SpecIndex& i) {
            return cplx(0.0, 0.5) * double(i.g[mu] + i.gamma[mu]);
        });
        const ChartProfile dzbarU = cp_index_scale(U0, [mu](const SpecIndex& i) {
            return cplx(0.0, 0.5) * double(i.g[mu] - i.gamma[mu]);
        });
        // the four Burgers-type couplings
        struct Combo {
            const ChartProfile* M;
            const MatPoly* grad;
            const ChartProfile* dU;
        };
        const Combo combos[4] = {{&Du, &cmd.dphix, &dzU},
                                 {&Du, &cmd.dphix_conj, &dzbarU},
                                 {&Dubar, &cmd.dphix_conj, &dzbarU},
                                 {&Dubar, &cmd.dphix, &dzU}};
        for (const auto& cb : combos) {
            ChartProfile Mg = scalar_poly_times(*cb.grad, *cb.M);
            ChartProductResult pr = cp_product(Mg, *cb.dU, G);
            out.rectification_mass += pr.rectification_mass;
            NL = cp_add(NL, pr.value);
        }
        // F differentials
        NL = cp_add(NL, apply_poly_profile(cmd.dFdu, U0));
        NL = cp_add(NL, apply_poly_profile(cmd.dFdubar, cp_conj(U0)));
        // background gradient coupling
        ChartProfile bg = chart_like(U0);
        const ChartField du0f = poly_as_field(cmd.du0dx);
        for (const auto& src : {&Du, &Dubar})
            for (const auto& [idx, f] : src->comp) {
                ChartField v = cf_product(f, du0f, U0.n_nodes);
                auto it = bg.comp.find(idx);
                if (it == bg.comp.end())
                    bg.comp.emplace(idx, std::move(v));
                else
                    it->second = cf_add(it->second, v);
            }
        NL = cp_add(NL, bg);
    } else {
        // semilinear: F(U0) assembled monomial by monomial in the algebra
        int cidx = 0;
        for (int i = 0; i < N; ++i) {
            for (const auto& mono : model.F[i].terms) {
                const MatPoly& cpoly = cmd.Fcoeff[cidx++];
                // scalar product of the component powers
                ChartProfile acc = chart_like(U0);
                {
                    ChartField unit;
                    unit.rows = 1;
                    unit.cols = 1;
                    ChartTerm t;
                    t.poly.assign(1, std::vector<MatC>(U0.n_nodes, MatC::Constant(1, 1, 1.0)));
                    unit.terms.push_back(t);
                    const int m_phases = U0.comp.empty() ? 1 : U0.comp.begin()->first.m();
                    acc.comp.emplace(SpecIndex::zero(m_phases), unit);
                }
                bool empty = false;
                for (int k = 0; k < N && !empty; ++k) {
                    for (int p = 0; p < mono.a[k]; ++p) {
                        ChartProductResult pr = cp_product(acc, component(U0, k, false), G);
                        out.rectification_mass += pr.rectification_mass;
                        acc = pr.value;
                        if (acc.comp.empty()) empty = true;
                    }
                    for (int p = 0; p < mono.b[k]; ++p) {
                        ChartProductResult pr = cp_product(acc, component(U0, k, true), G);
                        out.rectification_mass += pr.rectification_mass;
                        acc = pr.value;
                        if (acc.comp.empty()) empty = true;
                    }
                }
                if (mono.degree() == 0 || empty) continue;
                // scale by the coefficient and embed into row i
                ChartProfile term = chart_like(U0);
                for (const auto& [idx, f] : acc.comp) {
                    ChartField scaled = cf_apply_poly(cpoly, f, U0.n_nodes);
                    term.comp.emplace(idx, embed_row(scaled, i, N));
                }
                NL = cp_add(NL, term);
            }
        }
    }
    out.N = std::move(NL);
    return out;
}

ChartProfile build_U1_chart(const MultiplierSetup& msetup, const ChartProfile& N) {
    return cp_scale(apply_Q_chart(msetup, N), cplx(-1.0, 0.0));
}

// ---------------------------------------------------------------------------

VecC AsymptoticSolution::eval_charts(const std::vector<ChartProfile>& charts, double t,
                                     double x, double eps) const {
    VecC acc = VecC::Zero(model->N);
    for (const auto& ch : charts) {
        const double s = x - ch.path.eval(t);
        if (std::abs(s) >= ch.s0) continue;
        for (const auto& [idx, f] : ch.comp) {
            const cplx Psi = phases->Psi(idx.g, idx.gamma, t, x);
            const double damp = Psi.imag() / eps;
            if (damp > 46.0) continue;
            const MatC val = ch.eval(idx, t, x);
            if (!val.size()) continue;
            acc += VecC(val) * std::exp(cplx(0, 1) * Psi.real() / eps - damp);
        }
    }
    return acc;
}

VecC AsymptoticSolution::v(double t, double x, double eps) const {
    VecC out = model->u0_at(t, x);
    const double scale = p == 1 ? eps : 1.0;
    out += scale * (eval_charts(U0, t, x, eps) + eps * eval_charts(U1, t, x, eps));
    return out;
}

void AsymptoticSolution::dv(double t, double x, double eps, VecC& vt, VecC& vx) const {
    const int N = model->N;
    vt = VecC::Zero(N);
    vx = VecC::Zero(N);
    // background gradient (u0 is analytic in the registry; FD in t is exact 0
    // for the shipped time-independent backgrounds, but keep it general)
    {
        const double ht = 1e-6 * std::max(model->T, 1e-6);
        const double tp = std::min(t + ht, model->T), tm = std::max(t - ht, 0.0);
        vt += (model->u0_at(tp, x) - model->u0_at(tm, x)) / (tp - tm);
        vx += model->du0_dx(t, x);
    }
    const double scale = p == 1 ? eps : 1.0;
    auto add_charts = [&](const std::vector<ChartProfile>& charts, double weight) {
        for (const auto& ch : charts) {
            const double s = x - ch.path.eval(t);
            if (std::abs(s) >= ch.s0) continue;
            for (const auto& [idx, f] : ch.comp) {
                const cplx Psi = phases->Psi(idx.g, idx.gamma, t, x);
                const double damp = Psi.imag() / eps;
                if (damp > 46.0) continue;
                const cplx osc = std::exp(cplx(0, 1) * Psi.real() / eps - damp);
                const MatC val = ch.eval(idx, t, x);
                if (!val.size()) continue;
                const MatC dvalt = ch.eval_dt(idx, t, x);
                const MatC dvalx = ch.eval_dx(idx, t, x);
                const cplx iPsit = cplx(0, 1) * phases->dPsi_dt(idx.g, idx.gamma, t, x) / eps;
                const cplx iPsix = cplx(0, 1) * phases->dPsi_dx(idx.g, idx.gamma, t, x) / eps;
                vt += weight * (VecC(dvalt) + iPsit * VecC(val)) * osc;
                vx += weight * (VecC(dvalx) + iPsix * VecC(val)) * osc;
            }
        }
    };
    add_charts(U0, scale);
    add_charts(U1, scale * eps);
}

VecC AsymptoticSolution::residual(double t, double x, double eps) const {
    VecC vt, vx;
    dv(t, x, eps, vt, vx);
    return model->L_residual(t, x, v(t, x, eps), vt, vx);
}

VecC AsymptoticSolution::datum(double x, double eps) const {
    VecC out = model->u0_at(0.0, x);
    const double scale = p == 1 ? eps : 1.0;
    for (const auto& pd : phases->data) {
        const cplx psi = pd.psi_at(x);
        const double damp = psi.imag() / eps;
        if (damp > 46.0) continue;
        out += scale * pd.h_at(x) * std::exp(cplx(0, 1) * psi.real() / eps - damp);
    }
    return out;
}

AsymptoticSolution assemble(const SystemModel& model, const PhaseFamily& phases,
                            const MultiplierSetup& msetup,
                            const std::vector<TransportContext>& ctxs,
                            const std::vector<std::vector<RayState>>& solutions,
                            double rect_tol) {
    AsymptoticSolution sol;
    sol.model = &model;
    sol.phases = &phases;
    sol.p = model.mode == Mode::Quasilinear ? 1 : 0;
    for (size_t r = 0; r < ctxs.size(); ++r) {
        ChartProfile ub = extend_off_ray(ctxs[r], solutions[r]);
        ChartProfile u0 = apply_E_chart(msetup, ub);
        const PhaseRep& rep = phases.reps[ctxs[r].mu];
        ChartModelData cmd = make_chart_model_data(model, rep, ctxs[r].ray.ell, u0);
        BuildNResult nb = build_N_chart(model, cmd, u0, ctxs[r].G);
        sol.rectification_mass += nb.rectification_mass;
        ChartProfile u1 = build_U1_chart(msetup, nb.N);
        sol.Ubar.push_back(std::move(ub));
        sol.U0.push_back(std::move(u0));
        sol.N.push_back(std::move(nb.N));
        sol.U1.push_back(std::move(u1));
    }
    if (sol.rectification_mass > rect_tol)
        throw RectificationDetected("assembled nonlinearity generated non-oscillatory mass " +
                                    std::to_string(sol.rectification_mass));
    return sol;
}

} // namespace cgo
