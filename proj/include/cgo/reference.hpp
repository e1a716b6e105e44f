// reference.hpp — independent finite-difference reference solver used as a
// cross-validation oracle at moderate eps: Lax-Wendroff (or upwind-split)
// with Strang-split source, oscillation-resolving grid, and a Richardson
// self-convergence certificate. Diagnostic only; never gates the suite.

#pragma once

#include "cgo/assembler.hpp"

namespace cgo {

struct ReferenceOptions {
    std::string scheme = "lax-wendroff"; // or "upwind-split"
    double dx = 0.0;                     // 0 = choose from eps and the data
    double cfl = 0.8;
    int n_slices = 11;                   // stored time slices
    bool richardson = true;
    double self_convergence_tol = 2e-2;  // relative; the Richardson ratio is the certificate
};

struct ReferenceSolution {
    std::vector<double> xs;
    std::vector<double> t_slices;
    std::vector<std::vector<VecC>> slices; // [slice][j]
    double dx = 0.0, dt = 0.0;
    double self_convergence = 0.0;       // |u_h - u_{h/2}| at final time
    double richardson_ratio = 0.0;       // ~4 for a second-order scheme
};

ReferenceSolution solve_reference(const SystemModel& model, const AsymptoticSolution& asy,
                                  double eps, const ReferenceOptions& opt = {});

struct CompareRow {
    double eps = 0.0;
    double sup = 0.0;
    double l2 = 0.0;
};

// Discrepancy between v^eps and the reference on the determinacy sub-lens
// (margin keeps boundary influence out).
std::vector<CompareRow> compare_reference(const SystemModel& model,
                                          const AsymptoticSolution& asy,
                                          const std::vector<double>& eps_list,
                                          double lens_margin = 0.1,
                                          const ReferenceOptions& opt = {});

} // namespace cgo
