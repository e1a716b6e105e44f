// profile.hpp — truncated sparse series over the bi-indexed spectrum with
// coefficient fields sampled on the (t,x) grid: the generic profile algebra
// (product, z-derivatives, conjugation, evaluation, torus coefficients).

#pragma once

#include <map>

#include "cgo/grid.hpp"
#include "cgo/phase.hpp"
#include "cgo/spectrum.hpp"

namespace cgo {

struct GridProfile {
    Grid grid;
    int m = 1;
    int G = 8;
    int rows = 1, cols = 1;
    bool oscillatory_only = true;
    std::map<SpecIndex, std::vector<MatC>> coeffs; // node-major fields

    int nodes() const { return grid.nt * grid.nx; }
    int node(int i, int j) const { return i * grid.nx + j; }

    void set_field(const SpecIndex& idx, std::vector<MatC> field);
    void set_constant(const SpecIndex& idx, const MatC& value);
    bool has(const SpecIndex& idx) const { return coeffs.count(idx) != 0; }

    // bilinear interpolation of one coefficient field
    MatC coeff_at(const SpecIndex& idx, double t, double x) const;

    double max_coeff_norm() const;
    // max coefficient magnitude among indices with gamma_max == G, relative
    // to the overall max (tail-decay diagnostic)
    double tail_fraction() const;
};

struct ProductResult {
    GridProfile value;
    double rectification_mass = 0.0; // total sup norm of produced g = 0 content
};

enum class ProductKeep { Full, Oscillatory };

// Index convolution with hard truncation at gamma_mu <= G.
ProductResult product(const GridProfile& a, const GridProfile& b,
                      ProductKeep keep = ProductKeep::Oscillatory);

GridProfile dz(const GridProfile& u, int mu);
GridProfile dzbar(const GridProfile& u, int mu);
GridProfile dtheta(const GridProfile& u, int mu);
GridProfile conjugate(const GridProfile& u);

// Evaluation at generic z = theta + i r (fields interpolated bilinearly).
MatC evaluate_z(const GridProfile& u, double t, double x, const std::vector<double>& theta,
                const std::vector<double>& r);

// Evaluation along the phases at z = phi/eps, with the underflow guard
// <gamma,chi>/eps > 46 skipping fully damped terms.
MatC evaluate_phase(const GridProfile& u, double t, double x, const PhaseFamily& phases,
                    double eps);

// Coefficients from samples on the double torus (theta-major layout:
// flat = ((theta multi-index) * Q^m + (theta' multi-index))).
struct TorusCoefficients {
    std::map<SpecIndex, MatC> coeffs;
    std::vector<SpecIndex> rejected; // failed the Sigma_osc filter
    double rejected_mass = 0.0;
};
TorusCoefficients coefficients_from_torus_samples(const std::vector<MatC>& samples, int m,
                                                  int P, int Q, bool oscillatory_filter,
                                                  double alias_tol = 1e-10);

} // namespace cgo
