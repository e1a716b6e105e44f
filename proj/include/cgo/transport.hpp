// transport.hpp — the nonlinear transport system on the reference manifold,
// reduced per ray to an initial-value problem in coefficient space:
//
//   dU/dt = -F[ pi (dpi/dt) U + B(t,V) dtheta U + C(t,V) U ],
//
// solved by Picard iteration (frozen V) and by direct projected integration.
// F projects onto Sigma_mu indices with the polarization projector; the
// nonlinear terms are assembled in the truncated coefficient algebra.

#pragma once

#include <map>

#include "cgo/phase.hpp"
#include "cgo/rayfield.hpp"
#include "cgo/spectrum.hpp"

namespace cgo {

struct RayState {
    std::map<SpecIndex, VecC> c;

    RayState operator+(const RayState& o) const;
    RayState operator*(double s) const;
    RayState& operator+=(const RayState& o);
    double norm2() const;   // l2 over stored coefficients
    double sup() const;     // max coefficient magnitude
    RayState conjugated() const;
    void prune(double floor = 0.0);
};

double state_distance(const RayState& a, const RayState& b);

// Per-ray context: coefficient series sampled on the half-step grid so that
// RK4 stage times hit stored nodes exactly.
struct TransportContext {
    const SystemModel* model = nullptr;
    Ray ray;
    int mu = 0, branch = 0, m = 1, G = 8;
    double T = 0.5;
    int steps = 400;             // macro RK4 steps
    int half_nodes() const { return 2 * steps + 1; }
    double t_half(int j) const { return T * double(j) / (2 * steps); }

    std::vector<MatC> pi, dpi;            // projector along the ray, d/dt
    std::vector<double> xi;               // d_x varphi_mu on the ray
    std::vector<std::vector<MatC>> dAdu, dAdubar; // [k][half-node]
    std::vector<MatC> dFdu, dFdubar;
    std::vector<VecC> du0dx;

    struct EulerEntry {
        int row = 0, col = 0;
        bool conj_col = false;
        double weight = 0.0;
        UMonomial mono;                   // residual monomial (one factor removed)
    };
    std::vector<EulerEntry> euler;        // semilinear multiplicative form

    double rect_tol = 1e-12;
    mutable double rect_mass = 0.0;       // accumulated over rhs evaluations

    // energy-estimate ingredients
    double sup_dxA0 = 0.0;
    double sup_xi = 0.0;
};

TransportContext make_transport_context(const SystemModel& model, const Ray& ray,
                                        const PhaseOde& ode, int m, int G,
                                        double rect_tol = 1e-12);

// Initial data: the fundamental coefficient e_mu with value h(x_o).
RayState initial_profile(const TransportContext& ctx, const PhaseData& data, int zero_index);

// Nonlinear right-hand side N(V)U = [B(t,V) dtheta + C(t,V)]U at half-node j,
// before projection (used by the conjugacy checks as well).
RayState transport_nonlinearity(const TransportContext& ctx, int j, const RayState& V,
                                const RayState& U);

// F-projection at half-node j: Sigma_mu filter, gamma <= G, polarization
// projector; g = 0 content is measured against rect_tol and dropped.
RayState project_F(const TransportContext& ctx, int j, const RayState& s);

struct LinearSolveResult {
    std::vector<RayState> states;   // per macro node (steps+1)
    std::vector<double> energy;     // |U(t)|^2 per node
    double C_est = 0.0;
    double max_energy_ratio = 0.0;  // max over t of E(t) / (e^{Ct} E(0))
};

// Method of lines for the linearized system with frozen V (Hermite-interpolated
// at stage midpoints); throws EnergyBlowup when the exponential envelope with
// 1.05 slack is pierced.
LinearSolveResult linear_step_solve(const TransportContext& ctx,
                                    const std::vector<RayState>& V, const RayState& H,
                                    double slack = 1.05);

struct PicardResult {
    std::vector<RayState> states;
    std::vector<double> deltas;     // sup |U_v - U_{v-1}|
    int iterations = 0;
    double T_effective = 0.0;
    int halvings = 0;
    double direct_diff = 0.0;       // vs direct nonlinear integration
    double C_est = 0.0;
    double max_energy_ratio = 0.0;
    double rect_mass = 0.0;
};

PicardResult picard_solve(const TransportContext& ctx, const RayState& H, double tol = 1e-10,
                          int nu_max = 40);

std::vector<RayState> direct_solve(const TransportContext& ctx, const RayState& H);

// Constant-in-s extension of the ray solution times the chart cutoff.
ChartProfile extend_off_ray(const TransportContext& ctx, const std::vector<RayState>& states);

// Double-torus reinterpretation of the coefficients (the injection j) and its
// inverse, which filters through the projector onto the oscillatory spectrum.
struct PeriodicState {
    std::map<SpecIndex, VecC> c;   // indices (g, h) on T^m x T^m
};
PeriodicState j_map(const RayState& u);
RayState j_inverse(const PeriodicState& u);

} // namespace cgo
