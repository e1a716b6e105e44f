// rayfield.hpp — coefficient fields supported on one ray chart, stored in
// ray-adapted coordinates as s-polynomials with time-sampled matrix
// coefficients times powers of the chart cutoff and its derivatives:
//
//   F(t, x) = sum_terms  ( sum_j C_j(t) s^j ) * w(s)^a w'(s)^b w''(s)^c,
//   s = x - x_ray(t).
//
// The class is closed under products, matrix-polynomial multipliers, and one
// application of d/dt, d/dx each (cutoff derivatives are analytic, so no
// finite differences ever cross the cutoff transition).

#pragma once

#include <map>

#include "cgo/phase.hpp"
#include "cgo/spectrum.hpp"

namespace cgo {

// Matrix-valued s-polynomial with node-sampled coefficients.
struct MatPoly {
    std::vector<std::vector<MatC>> c; // c[j][node], coefficient of s^j

    int degree() const { return int(c.size()) - 1; }
    static MatPoly from_series(std::vector<std::vector<MatC>> coef) { return MatPoly{std::move(coef)}; }
};

struct ChartTerm {
    std::vector<std::vector<MatC>> poly; // poly[j][node]
    int wa = 0, wb = 0, wc = 0;          // powers of w, w', w''
};

struct ChartField {
    int rows = 0, cols = 0;
    std::vector<ChartTerm> terms;
};

// All per-index fields on one chart. Time nodes are shared.
struct ChartProfile {
    int mu = 0, ell = 0;
    double s0 = 0.0;
    double t0 = 0.0, t1 = 1.0;            // node range
    int n_nodes = 0;
    HermiteSeries<double> path;           // the ray
    std::map<SpecIndex, ChartField> comp;

    Bump bump() const { return Bump{s0}; }
    double node_t(int i) const { return t0 + (t1 - t0) * double(i) / (n_nodes - 1); }

    MatC eval(const SpecIndex& idx, double t, double x) const;
    MatC eval_dx(const SpecIndex& idx, double t, double x) const;
    MatC eval_dt(const SpecIndex& idx, double t, double x) const; // at fixed x
};

// term/field algebra ------------------------------------------------------

ChartField cf_zero(int rows, int cols);
ChartField cf_add(const ChartField& a, const ChartField& b);
ChartField cf_scale(const ChartField& a, cplx s);
ChartField cf_conj(const ChartField& a);
// matrix product of coefficient fields (shape-checked; scalars broadcast)
ChartField cf_product(const ChartField& a, const ChartField& b, int n_nodes);
// multiply by a matrix s-polynomial M(t,s) from the left
ChartField cf_apply_poly(const MatPoly& M, const ChartField& a, int n_nodes);
// multiply by w(s)^k
ChartField cf_mul_bump(const ChartField& a, int k);
// analytic d/ds and d/dt|_s (node-wise Hermite slope for the time direction)
ChartField cf_ds(const ChartField& a);
ChartField cf_dt_at_fixed_s(const ChartField& a, double t0, double t1);
// scale node-wise by a scalar time series
ChartField cf_scale_series(const ChartField& a, const std::vector<cplx>& s);

// Whole-profile helpers ----------------------------------------------------

ChartProfile chart_like(const ChartProfile& proto); // same ray/grid, empty comp

ChartProfile cp_add(const ChartProfile& a, const ChartProfile& b);
ChartProfile cp_scale(const ChartProfile& a, cplx s);
ChartProfile cp_conj(const ChartProfile& a);
// index-wise scalar weight (dz, dzbar, dtheta and friends)
ChartProfile cp_index_scale(const ChartProfile& a,
                            const std::function<cplx(const SpecIndex&)>& w);
// convolution product on the same chart; g = 0 output tracked and dropped
struct ChartProductResult {
    ChartProfile value;
    double rectification_mass = 0.0;
};
ChartProductResult cp_product(const ChartProfile& a, const ChartProfile& b, int G,
                              int max_degree = 10);

// d/dx and d/dt|_x=const of every component (s-shift included).
ChartProfile cp_dx(const ChartProfile& a);
ChartProfile cp_dt(const ChartProfile& a);

} // namespace cgo
