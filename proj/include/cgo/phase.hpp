// phase.hpp — rays, the phase ODE system along each ray, and globally defined
// complex-phase representatives with analytic first derivatives.
//
// Near the ray through x_o the phase is the second-order expansion
//   phi(t,x) = varphi + xi(t) s + Phi(t) s^2 / 2,   s = x - x_ray(t),
// with xi' + alpha xi = 0, Phi' + 2 alpha Phi + beta xi = 0 along the ray.
// A representative is extended off the charts so that Im phi vanishes exactly
// on the rays and is bounded below elsewhere.

#pragma once

#include <optional>

#include "cgo/grid.hpp"
#include "cgo/system.hpp"

namespace cgo {

// Validated initial phase data for one mode.
struct PhaseData {
    int mu = 0;                 // 0-based mode number
    int branch = 0;             // 0-based ascending eigenvalue index l(mu)
    Expr psi;                   // closed-form complex phase of x
    std::vector<Expr> amplitude;

    struct ZeroPoint {
        double x0 = 0.0;
        cplx psi0;              // psi(x0), real up to tolerance
        double dpsi = 0.0;      // d psi(x0), real up to tolerance
        cplx d2psi;             // Im part > 0
        VecC h;                 // amplitude at x0
    };
    std::vector<ZeroPoint> zeros;

    cplx psi_at(double x) const { return psi.eval_tx(0.0, x); }
    VecC h_at(double x) const;
};

struct PhaseDataOptions {
    int n_samples = 601;
    double im_floor_tol = 1e-12;
    double polarization_tol = 1e-10;
    double fd_scale = 1e-3;     // step for psi derivatives at the zeros
};

// Checks assumption set: Im psi >= 0, clean nondegenerate zeros, d Re psi != 0,
// and the polarization condition pi_{l(mu)} h = h on the initial slice.
PhaseData validate_phase_data(const SystemModel& model, const PhaseSpec& spec, int mu,
                              const PhaseDataOptions& opt = {});

// Dense ray path with exact Hermite slopes (the traced speed).
struct Ray {
    int mu = 0, ell = 0;
    int branch = 0;
    double s0 = 0.0;            // chart half-width; bump is 1 on |s|<=s0/3
    HermiteSeries<double> path; // x(t) with dx/dt = lambda
    double x_at(double t) const { return path.eval(t); }
    double v_at(double t) const { return path.eval_dt(t); }
    Bump bump() const { return Bump{s0}; }
};

struct RayTraceOptions {
    int steps = 400;
    double boundary_slack = 1e-9;
};

// RK4 trace of dx/dt = lambda_{l}(t,x); throws RayEscapesLaterally if the path
// leaves the trapezoid before T.
Ray trace_ray(const SystemModel& model, int branch, double x_start, int mu, int ell,
              const RayTraceOptions& opt = {});

// Assigns the shared chart half-width: a third of the minimal pairwise ray
// distance, capped at rho/4; throws RayCollision when rays meet.
double assign_chart_width(const SystemModel& model, std::vector<Ray>& rays,
                          double s0_override = 0.0);

// Phase ODE solution along one ray.
struct PhaseOde {
    double varphi = 0.0;        // s^0 coefficient, constant in t
    HermiteSeries<double> xi;
    HermiteSeries<cplx> Phi;
    double im_Phi_min = 0.0;
};

// Integrate with caller-supplied coefficients (also the closed-form oracle hook).
PhaseOde integrate_phase_ode(const std::function<double(double)>& alpha,
                             const std::function<double(double)>& beta, double T,
                             double varphi0, double xi0, cplx Phi0, int steps);

// Coefficients alpha, beta from the eigenvalue field along the traced ray.
PhaseOde solve_phase_ode(const SystemModel& model, const Ray& ray,
                         const PhaseData::ZeroPoint& zero, int steps,
                         const EigenOptions& eig_opt = {});

// Global representative phi_mu(t,x) for one mode.
struct PhaseRep {
    int mu = 0, branch = 0;
    std::vector<Ray> rays;      // sorted by initial position
    std::vector<PhaseOde> odes;
    bool pure_quadratic = true; // single chart, no blend or floor needed
    double c_floor = 0.0;       // imaginary floor level (blend mode)
    double half_im_inf = 0.0;   // c = inf_t Im Phi / 2 (the floor constant)
    double blend_scale = 1.0;   // relative width of the Im-part cutoff

    cplx phi(double t, double x) const;
    cplx dphi_dt(double t, double x) const;
    cplx dphi_dx(double t, double x) const;
    double varphi(double t, double x) const { return phi(t, x).real(); }
    double chi(double t, double x) const { return phi(t, x).imag(); }

    int nearest_ray(double t, double x) const;
    double s_at(double t, double x, int ell) const { return x - rays[ell].x_at(t); }
};

struct PhaseRepOptions {
    bool force_blend = false;   // build the blend+floor variant even for one ray
    double blend_scale = 1.0;
    bool check_floor = true;
    Grid floor_grid;            // grid for the post-hoc lower-bound scan
};

PhaseRep build_phase_representative(const SystemModel& model, std::vector<Ray> rays,
                                    std::vector<PhaseOde> odes,
                                    const PhaseRepOptions& opt = {});

// Log-log order fit of |V_mu phi| near the rays; slope (or exact flag).
struct EikonalReport {
    PowerFit ray_fit;       // |dphi_t + lambda dphi_x| vs |s|
    PowerFit t0_fit;        // |phi(0,.) - psi| vs |s|
    double ray_max = 0.0;   // max residual over the sample set
    double t0_max = 0.0;
};

EikonalReport eikonal_residual(const SystemModel& model, const PhaseRep& rep,
                               const PhaseData& data, double s_min = 1e-3,
                               double s_max = 1e-1, int n_s = 25, int n_t = 5);

// All modes together; Psi(g,gamma;phi) = <g,varphi> + i <gamma,chi>.
struct PhaseFamily {
    std::vector<PhaseData> data;
    std::vector<PhaseRep> reps;
    int m() const { return int(reps.size()); }

    cplx Psi(const std::vector<int>& g, const std::vector<int>& gamma, double t,
             double x) const;
    cplx dPsi_dt(const std::vector<int>& g, const std::vector<int>& gamma, double t,
                 double x) const;
    cplx dPsi_dx(const std::vector<int>& g, const std::vector<int>& gamma, double t,
                 double x) const;
};

} // namespace cgo
