#include "cgo/phase.hpp"

#include <algorithm>
#include <cmath>

#include "cgo/errors.hpp"

namespace cgo {

namespace {

// 5-point stencils for the phase datum derivatives at a point.
cplx d1_5pt(const std::function<cplx(double)>& f, double x, double h) {
    return (-f(x + 2 * h) + 8.0 * f(x + h) - 8.0 * f(x - h) + f(x - 2 * h)) / (12.0 * h);
}
cplx d2_5pt(const std::function<cplx(double)>& f, double x, double h) {
    return (-f(x + 2 * h) + 16.0 * f(x + h) - 30.0 * f(x) + 16.0 * f(x - h) - f(x - 2 * h)) /
           (12.0 * h * h);
}

} // namespace

VecC PhaseData::h_at(double x) const {
    VecC out(int(amplitude.size()));
    for (size_t k = 0; k < amplitude.size(); ++k) out[int(k)] = amplitude[k].eval_tx(0.0, x);
    return out;
}

PhaseData validate_phase_data(const SystemModel& model, const PhaseSpec& spec, int mu,
                              const PhaseDataOptions& opt) {
    PhaseData out;
    out.mu = mu;
    out.branch = spec.branch - 1;
    out.psi = spec.psi;
    out.amplitude = spec.amplitude;
    if (out.branch < 0 || out.branch >= model.N)
        throw PhaseError("phase " + std::to_string(mu + 1) + ": branch out of range");
    if (int(spec.amplitude.size()) != model.N)
        throw PhaseError("phase " + std::to_string(mu + 1) + ": amplitude needs " +
                         std::to_string(model.N) + " components");

    auto psi = [&](double x) { return spec.psi.eval_tx(0.0, x); };
    const double x_lo = model.xbar - model.rho, x_hi = model.xbar + model.rho;
    const double h = opt.fd_scale * model.rho;

    // Im psi >= 0 on the closed initial slice, zero only at the listed points.
    const double exclusion = model.rho / 50.0;
    for (int i = 0; i < opt.n_samples; ++i) {
        const double x = x_lo + (x_hi - x_lo) * double(i) / (opt.n_samples - 1);
        const double im = psi(x).imag();
        if (im < -opt.im_floor_tol)
            throw PhaseError("Im psi < 0 at x=" + std::to_string(x));
        double dist = std::numeric_limits<double>::infinity();
        for (double z : spec.zeros) dist = std::min(dist, std::abs(x - z));
        if (dist > exclusion && !(im > 0.0))
            throw PhaseError("Im psi vanishes away from the listed zeros near x=" +
                             std::to_string(x));
        const double dre = d1_5pt(psi, x, h).real();
        if (std::abs(dre) < 1e-8)
            throw PhaseError("d Re psi vanishes at x=" + std::to_string(x));
    }

    for (double z : spec.zeros) {
        if (!(z > x_lo && z < x_hi))
            throw PhaseError("zero point " + std::to_string(z) + " not interior to X^0");
        PhaseData::ZeroPoint zp;
        zp.x0 = z;
        zp.psi0 = psi(z);
        if (std::abs(zp.psi0.imag()) > 1e-10)
            throw PhaseError("Im psi(x_o) != 0 at listed zero " + std::to_string(z));
        const cplx d1 = d1_5pt(psi, z, h);
        if (std::abs(d1.imag()) > 1e-7)
            throw PhaseError("d Im psi(x_o) != 0 at listed zero " + std::to_string(z));
        zp.dpsi = d1.real();
        zp.d2psi = d2_5pt(psi, z, h);
        if (!(zp.d2psi.imag() > 1e-12))
            throw PhaseError("d2 Im psi(x_o) must be positive at " + std::to_string(z));
        zp.h = out.h_at(z);
        out.zeros.push_back(zp);
    }
    if (out.zeros.empty()) throw PhaseError("phase has no zeros of Im psi");

    // polarization of the amplitude field on the initial slice
    for (int i = 0; i <= 60; ++i) {
        const double x = x_lo + (x_hi - x_lo) * double(i) / 60.0;
        const VecC hvec = out.h_at(x);
        const double nh = hvec.norm();
        if (nh == 0.0) continue;
        const EigenData ed = eig_decompose_point(model, 0.0, x);
        const double defect = (ed.proj[out.branch] * hvec - hvec).norm();
        if (defect > opt.polarization_tol * std::max(1.0, nh))
            throw PolarizationViolated("pi h != h at x=" + std::to_string(x) + " (defect " +
                                       std::to_string(defect) + ")");
    }
    return out;
}

Ray trace_ray(const SystemModel& model, int branch, double x_start, int mu, int ell,
              const RayTraceOptions& opt) {
    Ray ray;
    ray.mu = mu;
    ray.ell = ell;
    ray.branch = branch;
    const int n = 2 * opt.steps; // micro-steps; all nodes stored
    const double h = model.T / n;
    auto lambda = [&](double t, double x) {
        return eig_decompose_point(model, t, x).lambda[branch];
    };
    std::vector<double> xs(n + 1), vs(n + 1);
    double x = x_start;
    xs[0] = x;
    vs[0] = lambda(0.0, x);
    for (int i = 0; i < n; ++i) {
        const double t = h * i;
        const double k1 = lambda(t, x);
        const double k2 = lambda(t + 0.5 * h, x + 0.5 * h * k1);
        const double k3 = lambda(t + 0.5 * h, x + 0.5 * h * k2);
        const double k4 = lambda(t + h, x + h * k3);
        x += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
        const double tn = h * (i + 1);
        const double half = model.rho - model.c * tn;
        if (std::abs(x - model.xbar) >= half - opt.boundary_slack)
            throw RayEscapesLaterally("ray (" + std::to_string(mu + 1) + "," +
                                      std::to_string(ell + 1) + ") leaves the domain at t=" +
                                      std::to_string(tn));
        xs[i + 1] = x;
        vs[i + 1] = lambda(tn, x);
    }
    ray.path.t0 = 0.0;
    ray.path.t1 = model.T;
    ray.path.y = std::move(xs);
    ray.path.dy = std::move(vs);
    return ray;
}

double assign_chart_width(const SystemModel& model, std::vector<Ray>& rays,
                          double s0_override) {
    double dmin = std::numeric_limits<double>::infinity();
    for (size_t a = 0; a < rays.size(); ++a)
        for (size_t b = a + 1; b < rays.size(); ++b) {
            const int n = std::min(rays[a].path.size(), rays[b].path.size());
            for (int i = 0; i < n; ++i)
                dmin = std::min(dmin, std::abs(rays[a].path.y[i] - rays[b].path.y[i]));
        }
    if (rays.size() > 1 && dmin < 1e-9)
        throw RayCollision("distinct rays intersect inside the domain");
    double s0 = std::min(model.rho / 4.0, dmin / 3.0);
    if (s0_override > 0.0) {
        if (s0_override > dmin / 3.0 + 1e-12)
            throw RayCollision("s0 override violates the 3*s0 disjointness margin");
        s0 = s0_override;
    }
    for (auto& r : rays) r.s0 = s0;
    return s0;
}

PhaseOde integrate_phase_ode(const std::function<double(double)>& alpha,
                             const std::function<double(double)>& beta, double T,
                             double varphi0, double xi0, cplx Phi0, int steps) {
    PhaseOde out;
    out.varphi = varphi0;
    const int n = 2 * steps;
    const double h = T / n;
    std::vector<double> xi(n + 1), dxi(n + 1);
    std::vector<cplx> Phi(n + 1), dPhi(n + 1);
    double xv = xi0;
    cplx Pv = Phi0;
    auto fxi = [&](double t, double v) { return -alpha(t) * v; };
    auto fPhi = [&](double t, cplx P, double v) { return -2.0 * alpha(t) * P - beta(t) * v; };
    xi[0] = xv;
    Phi[0] = Pv;
    dxi[0] = fxi(0, xv);
    dPhi[0] = fPhi(0, Pv, xv);
    out.im_Phi_min = Phi0.imag();
    for (int i = 0; i < n; ++i) {
        const double t = h * i;
        const double k1 = fxi(t, xv);
        const cplx K1 = fPhi(t, Pv, xv);
        const double k2 = fxi(t + 0.5 * h, xv + 0.5 * h * k1);
        const cplx K2 = fPhi(t + 0.5 * h, Pv + 0.5 * h * K1, xv + 0.5 * h * k1);
        const double k3 = fxi(t + 0.5 * h, xv + 0.5 * h * k2);
        const cplx K3 = fPhi(t + 0.5 * h, Pv + 0.5 * h * K2, xv + 0.5 * h * k2);
        const double k4 = fxi(t + h, xv + h * k3);
        const cplx K4 = fPhi(t + h, Pv + h * K3, xv + h * k3);
        xv += h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4);
        Pv += h / 6.0 * (K1 + 2.0 * K2 + 2.0 * K3 + K4);
        const double tn = h * (i + 1);
        if (!(Pv.imag() > 0.0))
            throw ImaginaryPartCollapse("Im Phi <= 0 at t=" + std::to_string(tn));
        xi[i + 1] = xv;
        Phi[i + 1] = Pv;
        dxi[i + 1] = fxi(tn, xv);
        dPhi[i + 1] = fPhi(tn, Pv, xv);
        out.im_Phi_min = std::min(out.im_Phi_min, Pv.imag());
    }
    out.xi.t0 = 0.0;
    out.xi.t1 = T;
    out.xi.y = std::move(xi);
    out.xi.dy = std::move(dxi);
    out.Phi.t0 = 0.0;
    out.Phi.t1 = T;
    out.Phi.y = std::move(Phi);
    out.Phi.dy = std::move(dPhi);
    return out;
}

PhaseOde solve_phase_ode(const SystemModel& model, const Ray& ray,
                         const PhaseData::ZeroPoint& zero, int steps,
                         const EigenOptions& eig_opt) {
    if (!(zero.d2psi.imag() > 0.0))
        throw ImaginaryPartCollapse("Im Phi(0) must be positive");
    auto alpha = [&](double t) {
        return branch_derivs(model, ray.branch, t, ray.x_at(t), eig_opt).alpha;
    };
    auto beta = [&](double t) {
        return branch_derivs(model, ray.branch, t, ray.x_at(t), eig_opt).beta;
    };
    return integrate_phase_ode(alpha, beta, model.T, zero.psi0.real(), zero.dpsi, zero.d2psi,
                               steps);
}

// ---------------------------------------------------------------------------
// Global representative
// ---------------------------------------------------------------------------

namespace {

struct Quad {
    double varphi = 0, xi = 0, s = 0, speed = 0, dxi_dt = 0;
    cplx Phi, dPhi_dt;
};

Quad quad_at(const PhaseRep& rep, int ell, double t, double x) {
    Quad q;
    const auto& ode = rep.odes[ell];
    q.varphi = ode.varphi;
    q.xi = ode.xi.eval(t);
    q.Phi = ode.Phi.eval(t);
    q.dxi_dt = ode.xi.eval_dt(t);
    q.dPhi_dt = ode.Phi.eval_dt(t);
    q.speed = rep.rays[ell].v_at(t);
    q.s = x - rep.rays[ell].x_at(t);
    return q;
}

cplx quad_value(const Quad& q) {
    return cplx(q.varphi, 0.0) + q.xi * q.s + 0.5 * q.Phi * q.s * q.s;
}
cplx quad_dx(const Quad& q) { return cplx(q.xi, 0.0) + q.Phi * q.s; }
cplx quad_dt(const Quad& q) {
    // d/dt at fixed x; ds/dt = -speed
    return q.dxi_dt * q.s + 0.5 * q.dPhi_dt * q.s * q.s + quad_dx(q) * (-q.speed);
}

struct Triple {
    double v = 0, dx = 0, dt = 0;
};

// Re part of the blend representative together with its derivatives.
Triple re_blend(const PhaseRep& rep, double t, double x) {
    const int L = int(rep.rays.size());
    const double w = rep.rays[0].s0 / 3.0;
    std::vector<double> xr(L), vr(L);
    for (int l = 0; l < L; ++l) {
        xr[l] = rep.rays[l].x_at(t);
        vr[l] = rep.rays[l].v_at(t);
    }
    auto from_quad = [&](int l) {
        const Quad q = quad_at(rep, l, t, x);
        return Triple{quad_value(q).real(), quad_dx(q).real(), quad_dt(q).real()};
    };
    if (L == 1 || x <= xr[0] + w) return from_quad(0);
    if (x >= xr[L - 1] - w) return from_quad(L - 1);
    int seg = 0;
    while (seg + 1 < L && x >= xr[seg + 1] - w) ++seg;
    // now x < xr[seg+1] - w; left side is ray `seg`
    const double a = xr[seg] + w, b = xr[seg + 1] - w;
    if (x <= a) return from_quad(seg);
    const double y = (x - a) / (b - a);
    const double B = SmoothStep::value(y);
    const double dBdy = SmoothStep::d1(y);
    const double dydx = 1.0 / (b - a);
    const double dydt = (-vr[seg] * (b - a) - (x - a) * (vr[seg + 1] - vr[seg])) /
                        ((b - a) * (b - a));
    const Triple q0 = from_quad(seg), q1 = from_quad(seg + 1);
    Triple out;
    out.v = (1.0 - B) * q0.v + B * q1.v;
    out.dx = (1.0 - B) * q0.dx + B * q1.dx + dBdy * dydx * (q1.v - q0.v);
    out.dt = (1.0 - B) * q0.dt + B * q1.dt + dBdy * dydt * (q1.v - q0.v);
    return out;
}

// Im part: per-chart bump times the quadratic, plus the gap floor.
Triple im_blend(const PhaseRep& rep, double t, double x) {
    Triple out;
    const Bump bb{rep.rays[0].s0 * rep.blend_scale};
    double wsum = 0.0, dwsum_dx = 0.0, dwsum_dt = 0.0;
    for (size_t l = 0; l < rep.rays.size(); ++l) {
        const Quad q = quad_at(rep, int(l), t, x);
        const double wl = bb.value(q.s), dwl = bb.d1(q.s);
        const double I = q.Phi.imag(), dI = q.dPhi_dt.imag();
        out.v += wl * 0.5 * I * q.s * q.s;
        out.dx += dwl * 0.5 * I * q.s * q.s + wl * I * q.s;
        out.dt += dwl * (-q.speed) * 0.5 * I * q.s * q.s +
                  wl * (0.5 * dI * q.s * q.s + I * q.s * (-q.speed));
        wsum += wl;
        dwsum_dx += dwl;
        dwsum_dt += dwl * (-q.speed);
    }
    out.v += rep.c_floor * (1.0 - wsum);
    out.dx -= rep.c_floor * dwsum_dx;
    out.dt -= rep.c_floor * dwsum_dt;
    return out;
}

} // namespace

int PhaseRep::nearest_ray(double t, double x) const {
    int best = 0;
    double bd = std::numeric_limits<double>::infinity();
    for (size_t l = 0; l < rays.size(); ++l) {
        const double d = std::abs(x - rays[l].x_at(t));
        if (d < bd) {
            bd = d;
            best = int(l);
        }
    }
    return best;
}

cplx PhaseRep::phi(double t, double x) const {
    if (pure_quadratic) return quad_value(quad_at(*this, 0, t, x));
    return cplx(re_blend(*this, t, x).v, im_blend(*this, t, x).v);
}

cplx PhaseRep::dphi_dx(double t, double x) const {
    if (pure_quadratic) return quad_dx(quad_at(*this, 0, t, x));
    return cplx(re_blend(*this, t, x).dx, im_blend(*this, t, x).dx);
}

cplx PhaseRep::dphi_dt(double t, double x) const {
    if (pure_quadratic) return quad_dt(quad_at(*this, 0, t, x));
    return cplx(re_blend(*this, t, x).dt, im_blend(*this, t, x).dt);
}

PhaseRep build_phase_representative(const SystemModel& model, std::vector<Ray> rays,
                                    std::vector<PhaseOde> odes, const PhaseRepOptions& opt) {
    if (rays.empty() || rays.size() != odes.size())
        throw PhaseError("representative needs one phase solution per ray");
    PhaseRep rep;
    rep.mu = rays[0].mu;
    rep.branch = rays[0].branch;

    // sort charts by position (rays never cross)
    std::vector<size_t> order(rays.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return rays[a].path.y[0] < rays[b].path.y[0]; });
    for (size_t i : order) {
        rep.rays.push_back(rays[i]);
        rep.odes.push_back(odes[i]);
    }

    double im_inf = std::numeric_limits<double>::infinity();
    for (const auto& o : rep.odes) im_inf = std::min(im_inf, o.im_Phi_min);
    rep.half_im_inf = 0.5 * im_inf;
    rep.blend_scale = opt.blend_scale;
    const double s0 = rep.rays[0].s0;
    const double plateau = s0 * opt.blend_scale / 3.0;
    rep.c_floor = rep.half_im_inf * plateau * plateau;

    rep.pure_quadratic = (rep.rays.size() == 1) && !opt.force_blend;
    if (rep.pure_quadratic) {
        // d Re phi must stay away from zero on the whole slab
        for (int i = 0; i <= 40 && rep.pure_quadratic; ++i) {
            const double t = model.T * i / 40.0;
            const double xi = rep.odes[0].xi.eval(t);
            const double PR = rep.odes[0].Phi.eval(t).real();
            const double reach = 2.0 * model.rho;
            if (std::abs(xi) - std::abs(PR) * reach < 1e-3 * std::abs(rep.odes[0].xi.y[0]))
                rep.pure_quadratic = false;
        }
    }

    if (opt.check_floor) {
        Grid g = opt.floor_grid;
        g.T = model.T;
        g.xbar = model.xbar;
        g.rho = model.rho;
        g.c = model.c;
        if (g.nt < 2) g.nt = 101;
        if (g.nx < 2) g.nx = 201;
        const double cb = rep.half_im_inf;
        for (int i = 0; i < g.nt; ++i) {
            for (int j = 0; j < g.nx; ++j) {
                const double t = g.t(i), x = g.x(j);
                if (!g.in_domain(t, x)) continue;
                double dmin = std::numeric_limits<double>::infinity();
                for (const auto& r : rep.rays) dmin = std::min(dmin, std::abs(x - r.x_at(t)));
                const double bound =
                    cb * std::min(dmin * dmin, plateau * plateau) * (1.0 - 1e-9);
                const double im = rep.phi(t, x).imag();
                if (im < bound - 1e-13)
                    throw FloorViolated("Im phi = " + std::to_string(im) + " below " +
                                        std::to_string(bound) + " at t=" + std::to_string(t) +
                                        ", x=" + std::to_string(x));
            }
        }
    }
    return rep;
}

EikonalReport eikonal_residual(const SystemModel& model, const PhaseRep& rep,
                               const PhaseData& data, double s_min, double s_max, int n_s,
                               int n_t) {
    EikonalReport out;
    const auto svals = logspace(s_min, s_max, n_s);
    std::vector<double> xs, ys; // ray residual samples
    std::vector<double> x0, y0; // t = 0 compatibility samples

    for (size_t l = 0; l < rep.rays.size(); ++l) {
        for (int it = 0; it < n_t; ++it) {
            const double t = model.T * (n_t == 1 ? 0.0 : 0.999 * double(it) / (n_t - 1));
            const double xr = rep.rays[l].x_at(t);
            for (double s : svals) {
                for (double sgn : {1.0, -1.0}) {
                    const double x = xr + sgn * s;
                    if (std::abs(x - model.xbar) > model.rho) continue;
                    const double lx = eig_decompose_point(model, t, x).lambda[rep.branch];
                    const cplx res = rep.dphi_dt(t, x) + lx * rep.dphi_dx(t, x);
                    xs.push_back(s);
                    ys.push_back(std::abs(res));
                    out.ray_max = std::max(out.ray_max, std::abs(res));
                }
            }
        }
        const double xr0 = rep.rays[l].x_at(0.0);
        for (double s : svals) {
            for (double sgn : {1.0, -1.0}) {
                const double x = xr0 + sgn * s;
                if (std::abs(x - model.xbar) > model.rho) continue;
                const cplx diff = rep.phi(0.0, x) - data.psi_at(x);
                x0.push_back(s);
                y0.push_back(std::abs(diff));
                out.t0_max = std::max(out.t0_max, std::abs(diff));
            }
        }
    }
    out.ray_fit = (out.ray_max <= 1e-10) ? PowerFit{0, 0, 1, true, false} : fit_loglog(xs, ys);
    out.t0_fit = (out.t0_max <= 1e-10) ? PowerFit{0, 0, 1, true, false} : fit_loglog(x0, y0);
    return out;
}

cplx PhaseFamily::Psi(const std::vector<int>& g, const std::vector<int>& gamma, double t,
                      double x) const {
    cplx out(0.0, 0.0);
    for (size_t mu = 0; mu < reps.size(); ++mu) {
        if (g[mu] == 0 && gamma[mu] == 0) continue;
        const cplx ph = reps[mu].phi(t, x);
        out += cplx(double(g[mu]) * ph.real(), double(gamma[mu]) * ph.imag());
    }
    return out;
}

cplx PhaseFamily::dPsi_dt(const std::vector<int>& g, const std::vector<int>& gamma, double t,
                          double x) const {
    cplx out(0.0, 0.0);
    for (size_t mu = 0; mu < reps.size(); ++mu) {
        if (g[mu] == 0 && gamma[mu] == 0) continue;
        const cplx d = reps[mu].dphi_dt(t, x);
        out += cplx(double(g[mu]) * d.real(), double(gamma[mu]) * d.imag());
    }
    return out;
}

cplx PhaseFamily::dPsi_dx(const std::vector<int>& g, const std::vector<int>& gamma, double t,
                          double x) const {
    cplx out(0.0, 0.0);
    for (size_t mu = 0; mu < reps.size(); ++mu) {
        if (g[mu] == 0 && gamma[mu] == 0) continue;
        const cplx d = reps[mu].dphi_dx(t, x);
        out += cplx(double(g[mu]) * d.real(), double(gamma[mu]) * d.imag());
    }
    return out;
}

} // namespace cgo
