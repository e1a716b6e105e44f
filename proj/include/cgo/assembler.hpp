// assembler.hpp — assembly of the leading profile U0 = E Ubar, the nonlinear
// image N(U0) in the chart algebra, the corrector U1 = -Q N(U0), and the
// evaluation of the approximate solution v and its exact derivatives.

#pragma once

#include "cgo/multiplier.hpp"
#include "cgo/transport.hpp"

namespace cgo {

// (t,x)-coefficient data of the model Taylor-expanded along one chart.
struct ChartModelData {
    MatPoly A0;                       // degree 2
    std::vector<MatPoly> dAdu, dAdubar;
    MatPoly dFdu, dFdubar;
    MatPoly du0dx;                    // N x 1
    MatPoly dphix;                    // 1 x 1, xi + Phi s
    MatPoly dphix_conj;
    std::vector<MatPoly> Fcoeff;      // semilinear monomial coefficients (1 x 1)
};

ChartModelData make_chart_model_data(const SystemModel& model, const PhaseRep& rep, int ell,
                                     const ChartProfile& proto);

struct BuildNResult {
    ChartProfile N;                   // nonlinear image on this chart
    double rectification_mass = 0.0;
};

// Quasilinear: the Burgers-type operator of the formal expansion; semilinear:
// the full operator L applied in the algebra.
BuildNResult build_N_chart(const SystemModel& model, const ChartModelData& cmd,
                           const ChartProfile& U0, int G);

// Corrector from the nonlinear image: U1 = -Q N(U0).
ChartProfile build_U1_chart(const MultiplierSetup& msetup, const ChartProfile& N);

struct AsymptoticSolution {
    const SystemModel* model = nullptr;
    const PhaseFamily* phases = nullptr;
    int p = 0; // 1 quasilinear, 0 semilinear
    std::vector<ChartProfile> Ubar, U0, N, U1;
    double rectification_mass = 0.0;

    VecC eval_charts(const std::vector<ChartProfile>& charts, double t, double x,
                     double eps) const;
    VecC v(double t, double x, double eps) const;
    void dv(double t, double x, double eps, VecC& vt, VecC& vx) const;
    VecC residual(double t, double x, double eps) const;
    // the exact oscillatory datum u^eps(0, x)
    VecC datum(double x, double eps) const;
};

// Full assembly from the per-ray transport solutions.
AsymptoticSolution assemble(const SystemModel& model, const PhaseFamily& phases,
                            const MultiplierSetup& msetup,
                            const std::vector<TransportContext>& ctxs,
                            const std::vector<std::vector<RayState>>& solutions,
                            double rect_tol = 1e-12);

} // namespace cgo
