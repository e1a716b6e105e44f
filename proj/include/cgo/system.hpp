// system.hpp — eigenstructure of the linearized principal part, validation of
// the model assumptions, and the principal symbol.

#pragma once

#include <Eigen/Dense>

#include "cgo/grid.hpp"
#include "cgo/model.hpp"

namespace cgo {

// Eigen data of A0(t,x) at one point: ascending eigenvalues and the rank-one
// spectral projectors with a deterministic eigenvector phase.
struct EigenData {
    VecD lambda;
    std::vector<MatC> proj;
    MatC A0;
};

struct EigenOptions {
    double delta_min = 1e-6;  // minimal admissible eigenvalue gap
    double fd_step = 1e-3;    // x-step for alpha/beta finite differences
};

EigenData eig_decompose_point(const SystemModel& model, double t, double x,
                              const EigenOptions& opt = {});

// lambda and its first two x-derivatives for one ascending branch (FD).
struct BranchDerivs {
    double lambda, alpha, beta;
};
BranchDerivs branch_derivs(const SystemModel& model, int branch, double t, double x,
                           const EigenOptions& opt = {});

// Grid-sampled eigen structure: lambda_l, pi_l, alpha_l, beta_l per node.
struct EigenField {
    Grid grid;
    int N = 0;
    // node-major: idx = i*nx + j; per node: N eigenvalues, N projectors
    std::vector<VecD> lambda;
    std::vector<std::vector<MatC>> proj;
    std::vector<VecD> alpha, beta;

    const VecD& lam(int i, int j) const { return lambda[i * grid.nx + j]; }
    const std::vector<MatC>& pis(int i, int j) const { return proj[i * grid.nx + j]; }
};

EigenField eig_decompose_grid(const SystemModel& model, const Grid& grid,
                              const EigenOptions& opt = {});

struct SamplePlan {
    int nt = 21;
    int nx = 21;
    int nu = 12;               // points on the sphere-net in K (plus u=0 and u0)
    double delta_min = 1e-6;
    double herm_tol = 1e-12;
    double background_tol = 1e-10;
    double semilinear_tol = 0.0; // F(t,x,0) must vanish exactly
};

struct ValidationReport {
    double max_hermitian_deviation = 0.0;
    double min_eigen_gap = 0.0;
    double background_residual = 0.0;  // quasilinear only
    double F_at_zero_norm = 0.0;       // semilinear only
    bool domain_ok = false;            // rho > c T and c >= sup |lambda|
    double sup_speed = 0.0;
    bool passed = false;
};

// Checks assumptions on a sample net over the closed trapezoid and K; throws
// NonHermitian / EigenvalueCollision / BackgroundNotSolution on hard failures.
ValidationReport validate_system(const SystemModel& model, const SamplePlan& plan = {});

// Principal symbol sigma(t,x,tau,xi) = i(tau I + A0 xi); tau, xi may be complex.
MatC symbol(const SystemModel& model, double t, double x, cplx tau, cplx xi);

} // namespace cgo
