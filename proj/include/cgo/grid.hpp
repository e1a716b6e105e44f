// grid.hpp — uniform tensor lattice on [0,T] x [xbar-rho, xbar+rho], with the
// trapezoid of determinacy |x - xbar| <= rho - c t as a mask, and the
// evaluation point sets used by sup-norm sweeps.

#pragma once

#include <vector>

#include "cgo/numerics.hpp"

namespace cgo {

struct Grid {
    int nt = 201, nx = 201;
    double T = 0.5, xbar = 0.0, rho = 1.2, c = 1.0;

    double dt() const { return T / (nt - 1); }
    double dx() const { return 2.0 * rho / (nx - 1); }
    double t(int i) const { return T * double(i) / (nt - 1); }
    double x(int j) const { return xbar - rho + 2.0 * rho * double(j) / (nx - 1); }

    bool in_domain(double tt, double xx, double slack = 1e-12) const {
        return tt >= -slack && tt <= T + slack &&
               std::abs(xx - xbar) <= rho - c * tt + slack;
    }
};

struct EvalPoint {
    double t, x;
};

// Points where sup-norms of oscillatory defects are taken: the domain-masked
// coarse lattice plus a dense band of chart offsets around each ray (the
// Gaussian concentration scale sqrt(eps) is far below the lattice spacing).
struct EvalSet {
    std::vector<EvalPoint> pts;

    static EvalSet lattice(const Grid& g, int stride_t = 1, int stride_x = 1) {
        EvalSet out;
        for (int i = 0; i < g.nt; i += stride_t)
            for (int j = 0; j < g.nx; j += stride_x)
                if (g.in_domain(g.t(i), g.x(j))) out.pts.push_back({g.t(i), g.x(j)});
        return out;
    }

    void add_ray_band(const Grid& g, const std::function<double(double)>& ray_x,
                      double smax, int nt_nodes, int n_lin, int n_log,
                      double s_lin = 0.02) {
        const auto ts = linspace(0.0, g.T, nt_nodes);
        std::vector<double> offs;
        for (int i = 1; i <= n_lin; ++i) offs.push_back(s_lin * double(i) / n_lin);
        if (smax > s_lin)
            for (double v : logspace(s_lin * 1.15, smax, n_log)) offs.push_back(v);
        for (double tt : ts) {
            const double xr = ray_x(tt);
            if (g.in_domain(tt, xr)) pts.push_back({tt, xr});
            for (double s : offs) {
                if (g.in_domain(tt, xr + s)) pts.push_back({tt, xr + s});
                if (g.in_domain(tt, xr - s)) pts.push_back({tt, xr - s});
            }
        }
    }
};

} // namespace cgo
