#include "cgo/pipeline.hpp"

#include <array>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

#include "cgo/errors.hpp"

namespace cgo {

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const ConfigError*>(&e)) return 1;
    if (dynamic_cast<const ValidationError*>(&e)) return 2;
    if (dynamic_cast<const PhaseError*>(&e)) return 3;
    if (dynamic_cast<const TransportError*>(&e)) return 4;
    if (dynamic_cast<const SweepError*>(&e)) return 5;
    if (dynamic_cast<const AlgebraError*>(&e)) return 4;
    return 9;
}

// ---------------------------------------------------------------------------
// stages
// ---------------------------------------------------------------------------

Pipeline build_pipeline_phases(const ModelConfig& cfg) {
    Pipeline pl;
    pl.cfg = cfg;
    pl.model = make_system(cfg);
    pl.vreport = validate_system(pl.model);
    pl.grid.nt = cfg.numerics.grid_nt;
    pl.grid.nx = cfg.numerics.grid_nx;
    pl.grid.T = pl.model.T;
    pl.grid.xbar = pl.model.xbar;
    pl.grid.rho = pl.model.rho;
    pl.grid.c = pl.model.c;

    if (cfg.phases.empty()) return pl;

    // validate data and trace all rays
    std::vector<Ray> all_rays;
    for (size_t mu = 0; mu < cfg.phases.size(); ++mu) {
        PhaseData pd = validate_phase_data(pl.model, cfg.phases[mu], int(mu));
        pl.phases.data.push_back(std::move(pd));
    }
    RayTraceOptions topt;
    topt.steps = cfg.numerics.rk_steps;
    EigenOptions eopt;
    if (cfg.numerics.eig_fd_step > 0) eopt.fd_step = cfg.numerics.eig_fd_step;
    for (auto& pd : pl.phases.data)
        for (size_t l = 0; l < pd.zeros.size(); ++l)
            all_rays.push_back(
                trace_ray(pl.model, pd.branch, pd.zeros[l].x0, pd.mu, int(l), topt));
    pl.s0 = assign_chart_width(pl.model, all_rays, cfg.numerics.s0_override);

    // per-mode representatives
    for (auto& pd : pl.phases.data) {
        std::vector<Ray> rays;
        std::vector<PhaseOde> odes;
        for (const auto& r : all_rays) {
            if (r.mu != pd.mu) continue;
            rays.push_back(r);
            odes.push_back(solve_phase_ode(pl.model, r, pd.zeros[r.ell],
                                           cfg.numerics.rk_steps, eopt));
        }
        PhaseRepOptions ropt;
        ropt.floor_grid.nt = std::min(101, cfg.numerics.grid_nt);
        ropt.floor_grid.nx = std::min(201, cfg.numerics.grid_nx);
        pl.phases.reps.push_back(
            build_phase_representative(pl.model, std::move(rays), std::move(odes), ropt));
    }

    for (size_t mu = 0; mu < pl.phases.reps.size(); ++mu)
        pl.eikonal.push_back(
            eikonal_residual(pl.model, pl.phases.reps[mu], pl.phases.data[mu]));

    MultiplierOptions mopt;
    mopt.e_outside = cfg.numerics.e_outside;
    mopt.e_rep = cfg.numerics.e_representative;
    mopt.G = cfg.numerics.G;
    pl.msetup = make_multiplier_setup(pl.model, pl.phases, mopt);
    return pl;
}

void run_transport_stage(Pipeline& pl) {
    pl.ctxs.clear();
    pl.transport.clear();
    for (const auto& rep : pl.phases.reps) {
        for (size_t l = 0; l < rep.rays.size(); ++l) {
            TransportContext ctx =
                make_transport_context(pl.model, rep.rays[l], rep.odes[l],
                                       pl.phases.m(), pl.cfg.numerics.G,
                                       pl.cfg.numerics.rect_tol);
            const RayState H = initial_profile(ctx, pl.phases.data[rep.mu], int(l));
            PicardResult pr =
                picard_solve(ctx, H, pl.cfg.numerics.picard_tol, pl.cfg.numerics.picard_max);
            pl.ctxs.push_back(std::move(ctx));
            pl.transport.push_back(std::move(pr));
        }
    }
}

void run_assembly_stage(Pipeline& pl) {
    std::vector<std::vector<RayState>> sols;
    for (const auto& pr : pl.transport) sols.push_back(pr.states);
    pl.asy = assemble(pl.model, pl.phases, pl.msetup, pl.ctxs, sols,
                      pl.cfg.numerics.rect_tol);
}

Pipeline build_pipeline(const ModelConfig& cfg) {
    Pipeline pl = build_pipeline_phases(cfg);
    if (!pl.phases.reps.empty()) {
        run_transport_stage(pl);
        run_assembly_stage(pl);
    }
    return pl;
}

EvalSet Pipeline::sweep_points(int lattice_stride, int band_t) const {
    EvalSet pts = EvalSet::lattice(grid, lattice_stride, lattice_stride);
    for (const auto& rep : phases.reps) {
        for (const auto& ray : rep.rays) {
            const HermiteSeries<double>* path = &ray.path;
            pts.add_ray_band(
                grid, [path](double t) { return path->eval(t); }, 2.0 * ray.s0 / 3.0,
                band_t, 48, 25);
        }
    }
    return pts;
}

// ---------------------------------------------------------------------------
// named sweeps
// ---------------------------------------------------------------------------

namespace {

// eps-independent per-point term table
struct TermEntry {
    VecC val;          // chart coefficient value
    VecC dvt, dvx;     // its derivatives (only when requested)
    cplx Psi, Psit, Psix;
    MatC coeff;        // optional defect coefficient (sigma, I-E, E)
    int tier = 0;      // 0: U0-level, 1: U1-level (extra eps factor)
};

struct PointTable {
    double t = 0, x = 0;
    VecC u0, du0t, du0x;
    std::vector<TermEntry> terms;
};

enum class CoeffKind { None, Sigma, IminusE, E };

std::vector<PointTable> build_tables(const Pipeline& pl,
                                     const std::vector<ChartProfile>& charts,
                                     const EvalSet& pts, bool derivs, CoeffKind ck) {
    const int N = pl.model.N;
    FourierMultiplier E;
    if (ck == CoeffKind::IminusE || ck == CoeffKind::E) E = build_E(pl.msetup);
    std::vector<PointTable> out;
    out.reserve(pts.pts.size());
    for (const auto& pt : pts.pts) {
        PointTable tab;
        tab.t = pt.t;
        tab.x = pt.x;
        tab.u0 = pl.model.u0_at(pt.t, pt.x);
        if (derivs) {
            const double ht = 1e-6 * std::max(pl.model.T, 1e-6);
            const double tp = std::min(pt.t + ht, pl.model.T), tm = std::max(pt.t - ht, 0.0);
            tab.du0t = (pl.model.u0_at(tp, pt.x) - pl.model.u0_at(tm, pt.x)) / (tp - tm);
            tab.du0x = pl.model.du0_dx(pt.t, pt.x);
        }
        MatC A0;
        if (ck == CoeffKind::Sigma) A0 = pl.model.A0(pt.t, pt.x);
        for (const auto& ch : charts) {
            const double s = pt.x - ch.path.eval(pt.t);
            if (std::abs(s) >= ch.s0) continue;
            for (const auto& [idx, f] : ch.comp) {
                const MatC val = ch.eval(idx, pt.t, pt.x);
                if (!val.size()) continue;
                TermEntry te;
                te.val = VecC(val);
                double mag = val.cwiseAbs().maxCoeff();
                if (derivs) {
                    te.dvt = VecC(ch.eval_dt(idx, pt.t, pt.x));
                    te.dvx = VecC(ch.eval_dx(idx, pt.t, pt.x));
                    mag = std::max({mag, te.dvt.cwiseAbs().maxCoeff(),
                                    te.dvx.cwiseAbs().maxCoeff()});
                }
                if (mag == 0.0) continue;
                te.Psi = pl.phases.Psi(idx.g, idx.gamma, pt.t, pt.x);
                te.Psit = pl.phases.dPsi_dt(idx.g, idx.gamma, pt.t, pt.x);
                te.Psix = pl.phases.dPsi_dx(idx.g, idx.gamma, pt.t, pt.x);
                switch (ck) {
                    case CoeffKind::Sigma:
                        te.coeff = cplx(0, 1) * (te.Psit * MatC::Identity(N, N) + te.Psix * A0);
                        break;
                    case CoeffKind::IminusE:
                        te.coeff = MatC::Identity(N, N) - E.coeff(idx, pt.t, pt.x);
                        break;
                    case CoeffKind::E:
                        te.coeff = E.coeff(idx, pt.t, pt.x);
                        break;
                    case CoeffKind::None:
                        break;
                }
                tab.terms.push_back(std::move(te));
            }
        }
        out.push_back(std::move(tab));
    }
    return out;
}

double sup_coeff_defect(const std::vector<PointTable>& tables, double eps, int N) {
    double sup = 0.0;
    for (const auto& tab : tables) {
        VecC acc = VecC::Zero(N);
        bool any = false;
        for (const auto& te : tab.terms) {
            const double damp = te.Psi.imag() / eps;
            if (damp > 46.0) continue;
            acc += (te.coeff * te.val) * std::exp(cplx(0, 1) * te.Psi.real() / eps - damp);
            any = true;
        }
        if (any) sup = std::max(sup, acc.cwiseAbs().maxCoeff());
    }
    return sup;
}

} // namespace

std::vector<std::string> core_sweep_names() {
    return {"PU0", "IEU0", "EN", "EUb", "resid", "init"};
}

double sweep_threshold(const Pipeline& pl, const std::string& label) {
    const double pp = pl.p();
    if (label == "PU0" || label == "IEU0" || label == "EE-E" || label == "PE" ||
        label == "EP" || label == "class-k2")
        return 1.4;
    if (label == "EN" || label == "EUb" || label == "PQ-(I-E)" || label == "QP-(I-E)" ||
        label == "class-k0")
        return 0.45;
    if (label == "resid" || label == "init") return pp + 0.45;
    if (label.rfind("taylor-k", 0) == 0) {
        const int k = label.back() - '0';
        return k / 2.0 - 0.05;
    }
    throw SweepError("unknown sweep label " + label);
}

SweepReport named_sweep(const Pipeline& pl, const std::string& name) {
    const auto& eps = pl.cfg.numerics.eps_list;
    const int N = pl.model.N;
    const double thr = sweep_threshold(pl, name);

    if (name == "PU0") {
        const EvalSet pts = pl.sweep_points();
        const auto tables = build_tables(pl, pl.asy.U0, pts, false, CoeffKind::Sigma);
        return run_sweep("PU0", [&](double e) { return sup_coeff_defect(tables, e, N); }, eps,
                         thr);
    }
    if (name == "IEU0") {
        const EvalSet pts = pl.sweep_points();
        const auto tables = build_tables(pl, pl.asy.U0, pts, false, CoeffKind::IminusE);
        return run_sweep("IEU0", [&](double e) { return sup_coeff_defect(tables, e, N); }, eps,
                         thr);
    }
    if (name == "EN") {
        const EvalSet pts = pl.sweep_points();
        const auto tables = build_tables(pl, pl.asy.N, pts, false, CoeffKind::E);
        // the on-ray defect sits at the transport-solver accuracy floor when
        // the coefficients carry no transverse variation; that floor is exact
        // for this sweep's purposes
        return run_sweep("EN", [&](double e) { return sup_coeff_defect(tables, e, N); }, eps,
                         thr, 0.97, 1e-9);
    }
    if (name == "EUb") {
        // E Ubar - Ubar = U0 - Ubar: difference of the two chart families
        const EvalSet pts = pl.sweep_points();
        const auto t0 = build_tables(pl, pl.asy.U0, pts, false, CoeffKind::None);
        const auto tb = build_tables(pl, pl.asy.Ubar, pts, false, CoeffKind::None);
        auto supfn = [&](double e) {
            double sup = 0.0;
            for (size_t i = 0; i < t0.size(); ++i) {
                VecC acc = VecC::Zero(N);
                for (const auto& te : t0[i].terms) {
                    const double damp = te.Psi.imag() / e;
                    if (damp > 46.0) continue;
                    acc += te.val * std::exp(cplx(0, 1) * te.Psi.real() / e - damp);
                }
                for (const auto& te : tb[i].terms) {
                    const double damp = te.Psi.imag() / e;
                    if (damp > 46.0) continue;
                    acc -= te.val * std::exp(cplx(0, 1) * te.Psi.real() / e - damp);
                }
                sup = std::max(sup, acc.cwiseAbs().maxCoeff());
            }
            return sup;
        };
        return run_sweep("EUb", supfn, eps, thr);
    }
    if (name == "resid") {
        const EvalSet pts = pl.sweep_points();
        const auto tU0 = build_tables(pl, pl.asy.U0, pts, true, CoeffKind::None);
        const auto tU1 = build_tables(pl, pl.asy.U1, pts, true, CoeffKind::None);
        auto supfn = [&](double e) {
            double sup = 0.0;
            const double scale = pl.p() == 1 ? e : 1.0;
            for (size_t i = 0; i < tU0.size(); ++i) {
                VecC v = tU0[i].u0, vt = tU0[i].du0t, vx = tU0[i].du0x;
                auto add = [&](const PointTable& tab, double w) {
                    for (const auto& te : tab.terms) {
                        const double damp = te.Psi.imag() / e;
                        if (damp > 46.0) continue;
                        const cplx osc = std::exp(cplx(0, 1) * te.Psi.real() / e - damp);
                        v += w * te.val * osc;
                        vt += w * (te.dvt + cplx(0, 1) * te.Psit / e * te.val) * osc;
                        vx += w * (te.dvx + cplx(0, 1) * te.Psix / e * te.val) * osc;
                    }
                };
                add(tU0[i], scale);
                add(tU1[i], scale * e);
                const VecC L = pl.model.L_residual(tU0[i].t, tU0[i].x, v, vt, vx);
                sup = std::max(sup, L.cwiseAbs().maxCoeff());
            }
            return sup;
        };
        // constant-coefficient models drive the residual down to the
        // transport-integrator accuracy; below that floor the claim holds
        // with room to spare
        return run_sweep("resid", supfn, eps, thr, 0.97, 1e-9);
    }
    if (name == "init") {
        auto supfn = [&](double e) {
            double sup = 0.0;
            for (int j = 0; j < 1201; ++j) {
                const double x =
                    pl.model.xbar - pl.model.rho + 2.0 * pl.model.rho * j / 1200.0;
                const VecC d = pl.asy.v(0.0, x, e) - pl.asy.datum(x, e);
                sup = std::max(sup, d.cwiseAbs().maxCoeff());
            }
            return sup;
        };
        return run_sweep("init", supfn, eps, thr);
    }
    throw SweepError("unknown sweep " + name);
}

std::vector<SweepReport> identity_sweeps(const Pipeline& pl) {
    const auto& eps = pl.cfg.numerics.eps_list;
    const EvalSet pts = pl.sweep_points();
    const auto test = random_test_profile(pl.phases.m(), pl.model.N, pl.cfg.numerics.G,
                                          pl.cfg.numerics.seed);
    std::vector<SweepReport> out;
    for (IdentityKind k : {IdentityKind::EE, IdentityKind::PE, IdentityKind::EP,
                           IdentityKind::PQ, IdentityKind::QP}) {
        const DefectSweep ds = identity_sweep(pl.msetup, k, test, pts, eps);
        out.push_back(make_sweep_report(ds.label, ds.eps, ds.sup,
                                        sweep_threshold(pl, ds.label)));
    }
    return out;
}

std::vector<SweepReport> stability_sweeps(const Pipeline& pl) {
    const auto& eps = pl.cfg.numerics.eps_list;
    const EvalSet pts = pl.sweep_points();
    const auto test = random_test_profile(pl.phases.m(), pl.model.N, pl.cfg.numerics.G,
                                          pl.cfg.numerics.seed);
    std::vector<SweepReport> out;
    for (int k : {0, 2}) {
        const DefectSweep ds = class_stability_sweep(pl.msetup, k, 1.0, test, pts, eps,
                                                     pl.cfg.numerics.seed + 17);
        out.push_back(make_sweep_report(ds.label, ds.eps, ds.sup,
                                        sweep_threshold(pl, ds.label)));
    }
    return out;
}

MaslovReport check_maslov_bound(const Pipeline& pl, int n_samples) {
    // windows off the reference manifold: chi >= chi_min > 0 there, and the
    // elementary bound eps^{-k} |f e^{i phi/eps}| <= k^k e^{-k} sup |f/chi^k|
    // must hold pointwise with the sup over the same window
    MaslovReport rep;
    std::mt19937_64 rng(pl.cfg.numerics.seed + 5);
    std::uniform_real_distribution<double> ur(0.0, 1.0);
    auto f = [](double t, double x) { return std::sin(1.7 * x + 0.9 * t + 0.4) + 1.3; };

    for (const auto& mode : pl.phases.reps) {
        const double plateau = mode.rays[0].s0 / 3.0;
        std::vector<std::array<double, 3>> samples; // t, x, chi
        while (int(samples.size()) < n_samples) {
            const double t = pl.model.T * ur(rng);
            const double half = pl.model.rho - pl.model.c * t;
            const double x = pl.model.xbar - half + 2.0 * half * ur(rng);
            double dmin = std::numeric_limits<double>::infinity();
            for (const auto& ray : mode.rays) dmin = std::min(dmin, std::abs(x - ray.x_at(t)));
            if (dmin < plateau) continue; // stay in the window
            const double chi = mode.phi(t, x).imag();
            if (!(chi > 0)) continue;
            samples.push_back({t, x, chi});
        }
        for (int k = 1; k <= 3; ++k) {
            double Ck = 0.0;
            for (const auto& s : samples)
                Ck = std::max(Ck, std::abs(f(s[0], s[1])) / std::pow(s[2], k));
            Ck *= std::pow(double(k), k) * std::exp(-double(k));
            for (double eps : pl.cfg.numerics.eps_list) {
                for (const auto& s : samples) {
                    const double lhs =
                        std::pow(eps, -k) * std::abs(f(s[0], s[1])) * std::exp(-s[2] / eps);
                    ++rep.samples;
                    rep.worst_margin = std::max(rep.worst_margin, lhs / Ck);
                    if (lhs > Ck * (1.0 + 1e-12)) ++rep.violations;
                }
            }
        }
    }
    return rep;
}

std::vector<SweepReport> taylor_remainder_sweeps(const Pipeline& pl) {
    // near-ray Taylor remainder of order k against the quadratic damping:
    // |(f - T_{k-1} f) e^{i phi/eps}| = O(eps^{k/2})
    std::vector<SweepReport> out;
    const auto& rep0 = pl.phases.reps[0];
    const auto& ray = rep0.rays[0];
    auto f = [](double s) { return std::sin(1.3 * s + 0.7) + 0.4 * s * s * s; };
    auto d1 = [](double s) { return 1.3 * std::cos(1.3 * s + 0.7) + 1.2 * s * s; };
    auto d2 = [](double s) { return -1.69 * std::sin(1.3 * s + 0.7) + 2.4 * s; };
    for (int k = 1; k <= 3; ++k) {
        auto supfn = [&](double e) {
            double sup = 0.0;
            for (int it = 0; it <= 20; ++it) {
                const double t = pl.model.T * 0.999 * it / 20.0;
                const double xr = ray.x_at(t);
                for (int js = 1; js <= 160; ++js) {
                    const double s = ray.s0 * js / 240.0; // within the plateau
                    for (double sg : {1.0, -1.0}) {
                        const double ss = sg * s;
                        double rem = f(ss) - f(0.0);
                        if (k >= 2) rem -= d1(0.0) * ss;
                        if (k >= 3) rem -= 0.5 * d2(0.0) * ss * ss;
                        const double chi = rep0.phi(t, xr + ss).imag();
                        sup = std::max(sup, std::abs(rem) * std::exp(-chi / e));
                    }
                }
            }
            return sup;
        };
        out.push_back(run_sweep("taylor-k" + std::to_string(k), supfn,
                                pl.cfg.numerics.eps_list, k / 2.0 - 0.05));
    }
    return out;
}

// ---------------------------------------------------------------------------
// artifacts
// ---------------------------------------------------------------------------

namespace {

std::ofstream open_artifact(const std::string& path) {
    std::filesystem::create_directories(std::filesystem::path(path).parent_path());
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write artifact " + path);
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    out << "# generated " << std::put_time(std::gmtime(&now), "%FT%TZ") << "\n";
    out << std::setprecision(17);
    return out;
}

} // namespace

void write_phase_csv(const Pipeline& pl, const std::string& path) {
    auto out = open_artifact(path);
    out << "t,x";
    for (int mu = 1; mu <= pl.phases.m(); ++mu)
        out << ",re_phi_" << mu << ",im_phi_" << mu << ",re_dtphi_" << mu << ",im_dtphi_" << mu
            << ",re_dxphi_" << mu << ",im_dxphi_" << mu;
    out << "\n";
    for (int i = 0; i < pl.grid.nt; i += 4) {
        for (int j = 0; j < pl.grid.nx; j += 4) {
            const double t = pl.grid.t(i), x = pl.grid.x(j);
            if (!pl.grid.in_domain(t, x)) continue;
            out << t << "," << x;
            for (const auto& rep : pl.phases.reps) {
                const cplx ph = rep.phi(t, x), dt = rep.dphi_dt(t, x), dx = rep.dphi_dx(t, x);
                out << "," << ph.real() << "," << ph.imag() << "," << dt.real() << ","
                    << dt.imag() << "," << dx.real() << "," << dx.imag();
            }
            out << "\n";
        }
    }
}

void write_transport_csv(const Pipeline& pl, const std::string& path,
                         const std::string& history_path) {
    auto out = open_artifact(path);
    out << "ray,t";
    for (int mu = 1; mu <= pl.phases.m(); ++mu) out << ",g" << mu;
    for (int mu = 1; mu <= pl.phases.m(); ++mu) out << ",gamma" << mu;
    out << ",component,re,im\n";
    for (size_t r = 0; r < pl.transport.size(); ++r) {
        const auto& states = pl.transport[r].states;
        const int stride = std::max(1, int(states.size()) / 64);
        for (size_t i = 0; i < states.size(); i += stride) {
            const double t = pl.transport[r].T_effective * double(i) / (states.size() - 1);
            for (const auto& [idx, v] : states[i].c) {
                for (int k = 0; k < v.size(); ++k) {
                    out << r << "," << t;
                    for (int gv : idx.g) out << "," << gv;
                    for (int cv : idx.gamma) out << "," << cv;
                    out << "," << k << "," << v[k].real() << "," << v[k].imag() << "\n";
                }
            }
        }
    }
    auto hist = open_artifact(history_path);
    hist << "ray,nu,delta\n";
    for (size_t r = 0; r < pl.transport.size(); ++r)
        for (size_t i = 0; i < pl.transport[r].deltas.size(); ++i)
            hist << r << "," << (i + 2) << "," << pl.transport[r].deltas[i] << "\n";
}

void write_profile_csv(const Pipeline& pl, const std::string& path) {
    auto out = open_artifact(path);
    for (int mu = 1; mu <= pl.phases.m(); ++mu) out << (mu == 1 ? "" : ",") << "g" << mu;
    for (int mu = 1; mu <= pl.phases.m(); ++mu) out << ",gamma" << mu;
    out << ",t,x";
    for (int k = 1; k <= pl.model.N; ++k) out << ",re_u" << k << ",im_u" << k;
    out << "\n";
    for (const auto& ch : pl.asy.U0) {
        for (const auto& [idx, f] : ch.comp) {
            for (int i = 0; i < pl.grid.nt; i += 16) {
                for (int j = 0; j < pl.grid.nx; j += 8) {
                    const double t = pl.grid.t(i), x = pl.grid.x(j);
                    if (!pl.grid.in_domain(t, x)) continue;
                    const MatC v = ch.eval(idx, t, x);
                    if (!v.size() || v.cwiseAbs().maxCoeff() < 1e-300) continue;
                    bool first = true;
                    for (int gv : idx.g) {
                        out << (first ? "" : ",") << gv;
                        first = false;
                    }
                    for (int cv : idx.gamma) out << "," << cv;
                    out << "," << t << "," << x;
                    for (int k = 0; k < pl.model.N; ++k)
                        out << "," << v(k, 0).real() << "," << v(k, 0).imag();
                    out << "\n";
                }
            }
        }
    }
}

void write_field_csv(const Pipeline& pl, const std::string& path,
                     const std::vector<double>& eps) {
    auto out = open_artifact(path);
    out << "t,x,eps,component,re_v,im_v,abs_residual\n";
    for (double e : eps) {
        for (int i = 0; i < pl.grid.nt; i += 8) {
            for (int j = 0; j < pl.grid.nx; j += 8) {
                const double t = pl.grid.t(i), x = pl.grid.x(j);
                if (!pl.grid.in_domain(t, x)) continue;
                const VecC v = pl.asy.v(t, x, e);
                const VecC r = pl.asy.residual(t, x, e);
                for (int k = 0; k < pl.model.N; ++k)
                    out << t << "," << x << "," << e << "," << k << "," << v[k].real() << ","
                        << v[k].imag() << "," << std::abs(r[k]) << "\n";
            }
        }
    }
}

void write_report_csv(const std::vector<SweepReport>& reports, const std::string& path) {
    auto out = open_artifact(path);
    out << "label,eps,sup,slope,r2,threshold,status\n";
    for (const auto& rep : reports) {
        for (size_t i = 0; i < rep.eps.size(); ++i) {
            out << rep.label << "," << rep.eps[i] << "," << rep.sup[i] << "," << rep.fit.slope
                << "," << rep.fit.r2 << "," << rep.threshold << ","
                << (rep.exact ? "exact"
                              : (rep.superpoly ? "superpoly" : (rep.passed ? "pass" : "fail")))
                << "\n";
        }
    }
}

void write_summary(const RunArtifacts& art, const std::string& path) {
    auto out = open_artifact(path);
    for (const auto& note : art.notes) out << note << "\n";
    for (const auto& rep : art.reports) out << rep.verdict() << "\n";
    out << (art.all_passed ? "ALL PASS" : "FAILURES PRESENT") << "\n";
}

// ---------------------------------------------------------------------------
// commands
// ---------------------------------------------------------------------------

RunArtifacts run_command(const ModelConfig& cfg, const std::string& command,
                         const std::string& out_dir) {
    RunArtifacts art;
    auto note = [&](const std::string& s) { art.notes.push_back(s); };
    const std::string base = out_dir.empty() ? cfg.run.out_dir : out_dir;

    if (command == "check") {
        Pipeline pl;
        pl.cfg = cfg;
        pl.model = make_system(cfg);
        pl.vreport = validate_system(pl.model);
        note("validation: max hermitian deviation " +
             std::to_string(pl.vreport.max_hermitian_deviation));
        note("validation: min eigen gap " + std::to_string(pl.vreport.min_eigen_gap));
        note("validation: sup speed " + std::to_string(pl.vreport.sup_speed) +
             (pl.vreport.domain_ok ? " (domain ok)" : " (domain violated)"));
        art.all_passed = pl.vreport.domain_ok;
        if (!cfg.phases.empty()) {
            for (size_t mu = 0; mu < cfg.phases.size(); ++mu)
                validate_phase_data(pl.model, cfg.phases[mu], int(mu));
            note("phase data: validated " + std::to_string(cfg.phases.size()) + " mode(s)");
        }
        write_summary(art, base + "/summary.txt");
        return art;
    }

    if (command == "phase") {
        Pipeline pl = build_pipeline_phases(cfg);
        for (size_t mu = 0; mu < pl.eikonal.size(); ++mu) {
            const auto& er = pl.eikonal[mu];
            SweepReport rep;
            rep.label = "eikonal-ray-mu" + std::to_string(mu + 1);
            rep.threshold = 2.9;
            rep.exact = er.ray_fit.exact;
            rep.fit = er.ray_fit;
            rep.passed = er.ray_fit.exact || er.ray_fit.slope >= 2.9;
            art.reports.push_back(rep);
            SweepReport rep2;
            rep2.label = "eikonal-t0-mu" + std::to_string(mu + 1);
            rep2.threshold = 2.9;
            rep2.exact = er.t0_fit.exact;
            rep2.fit = er.t0_fit;
            rep2.passed = er.t0_fit.exact || er.t0_fit.slope >= 2.9;
            art.reports.push_back(rep2);
            if (!rep.passed || !rep2.passed)
                throw OrderTooLow("eikonal order below 2.9 for mode " +
                                  std::to_string(mu + 1));
        }
        write_phase_csv(pl, base + "/phase.csv");
        write_summary(art, base + "/summary.txt");
        return art;
    }

    if (command == "transport") {
        Pipeline pl = build_pipeline_phases(cfg);
        run_transport_stage(pl);
        for (size_t r = 0; r < pl.transport.size(); ++r) {
            const auto& pr = pl.transport[r];
            note("ray " + std::to_string(r) + ": picard iterations " +
                 std::to_string(pr.iterations) + ", direct-diff " +
                 std::to_string(pr.direct_diff) + ", energy ratio " +
                 std::to_string(pr.max_energy_ratio) + ", T_eff " +
                 std::to_string(pr.T_effective));
            art.all_passed = art.all_passed && pr.direct_diff <= 1e-8;
        }
        write_transport_csv(pl, base + "/transport.csv", base + "/picard_history.csv");
        write_summary(art, base + "/summary.txt");
        return art;
    }

    if (command == "assemble") {
        Pipeline pl = build_pipeline(cfg);
        note("rectification mass: " + std::to_string(pl.asy.rectification_mass));
        write_profile_csv(pl, base + "/profiles.csv");
        write_field_csv(pl, base + "/fields.csv", {cfg.numerics.eps_list.front()});
        write_summary(art, base + "/summary.txt");
        return art;
    }

    if (command == "sweep" || command == "all") {
        Pipeline pl = build_pipeline(cfg);
        // eikonal gates
        for (size_t mu = 0; mu < pl.eikonal.size(); ++mu) {
            const auto& er = pl.eikonal[mu];
            SweepReport rep;
            rep.label = "eikonal-mu" + std::to_string(mu + 1);
            rep.threshold = 2.9;
            rep.exact = er.ray_fit.exact;
            rep.fit = er.ray_fit;
            rep.passed = er.ray_fit.exact || er.ray_fit.slope >= 2.9;
            art.reports.push_back(rep);
            art.all_passed = art.all_passed && rep.passed;
        }
        // transport diagnostics
        for (size_t r = 0; r < pl.transport.size(); ++r) {
            const auto& pr = pl.transport[r];
            if (pr.direct_diff > 1e-8) {
                art.all_passed = false;
                note("ray " + std::to_string(r) + ": picard/direct disagree " +
                     std::to_string(pr.direct_diff));
            }
        }
        note("rectification mass: " + std::to_string(pl.asy.rectification_mass));
        // coherence and separation
        {
            const CoherenceReport cr = check_coherence(pl.msetup);
            note(std::string("coherence: max scaled det ") +
                 std::to_string(cr.max_scaled_det) + (cr.pass ? " PASS" : " FAIL"));
            const SeparationReport sr = check_separation(pl.msetup);
            note("separation: C_min " + std::to_string(sr.C_min) + " vs bound " +
                 std::to_string(sr.bound) + (sr.pass ? " PASS" : " FAIL"));
            art.all_passed = art.all_passed && cr.pass && sr.pass;
        }
        if (cfg.numerics.sweep_set != "none") {
            for (const auto& name : core_sweep_names()) {
                SweepReport rep = named_sweep(pl, name);
                art.all_passed = art.all_passed && rep.passed;
                art.reports.push_back(std::move(rep));
            }
        }
        {
            const MaslovReport mr = check_maslov_bound(pl, 2000);
            note("window bound: " + std::to_string(mr.violations) + " violations in " +
                 std::to_string(mr.samples) + " samples (worst margin " +
                 std::to_string(mr.worst_margin) + ")");
            art.all_passed = art.all_passed && mr.violations == 0;
        }
        const bool gate_identities = cfg.numerics.sweep_set == "full";
        if (cfg.numerics.sweep_set != "none")
        for (auto& rep : identity_sweeps(pl)) {
            if (gate_identities)
                art.all_passed = art.all_passed && rep.passed;
            else if (!rep.passed)
                rep.label += " (diagnostic)";
            art.reports.push_back(std::move(rep));
        }
        if (cfg.numerics.sweep_set != "none")
        for (auto& rep : stability_sweeps(pl)) {
            if (gate_identities)
                art.all_passed = art.all_passed && rep.passed;
            else if (!rep.passed)
                rep.label += " (diagnostic)";
            art.reports.push_back(std::move(rep));
        }
        if (gate_identities) {
            for (auto& rep : taylor_remainder_sweeps(pl)) {
                art.all_passed = art.all_passed && rep.passed;
                art.reports.push_back(std::move(rep));
            }
        }
        if (command == "all") {
            write_phase_csv(pl, base + "/phase.csv");
            write_transport_csv(pl, base + "/transport.csv", base + "/picard_history.csv");
            write_profile_csv(pl, base + "/profiles.csv");
            write_field_csv(pl, base + "/fields.csv", {cfg.numerics.eps_list.front()});
        }
        write_report_csv(art.reports, base + "/report.csv");
        write_summary(art, base + "/summary.txt");
        return art;
    }

    if (command == "compare") {
        Pipeline pl = build_pipeline(cfg);
        std::vector<double> eps = {0.2, 0.1, 0.05};
        const auto rows = compare_reference(pl.model, pl.asy, eps);
        bool monotone = true;
        for (size_t i = 0; i + 1 < rows.size(); ++i)
            if (rows[i + 1].sup >= rows[i].sup) monotone = false;
        for (const auto& row : rows)
            note("compare eps=" + std::to_string(row.eps) + ": sup " +
                 std::to_string(row.sup) + ", l2 " + std::to_string(row.l2));
        note(std::string("discrepancy monotone decrease: ") + (monotone ? "yes" : "no") +
             " (diagnostic, non-gating)");
        write_summary(art, base + "/summary.txt");
        return art;
    }

    throw ConfigError("unknown command '" + command + "'");
}

} // namespace cgo
