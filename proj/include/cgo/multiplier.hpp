// multiplier.hpp — the Fourier multipliers attached to a phase family: the
// symbol multiplier P, the approximate kernel projector E, the approximate
// partial inverse Q, together with the defect sweeps that certify the
// projector/inverse identities and the equivalence-class stability.

#pragma once

#include "cgo/phase.hpp"
#include "cgo/profile.hpp"
#include "cgo/rayfield.hpp"

namespace cgo {

struct MultiplierOptions {
    std::string e_outside = "identity";   // coefficient outside U Sigma_mu
    std::string e_rep = "taylor2";        // {taylor2, fullfield}
    int G = 8;
    double pi_fd_step = 0.0;              // s-step for the projector Taylor (0 = s0/8)
};

// Per-chart data shared by E and Q.
struct ChartOpData {
    int mu = 0, branch = 0, ell = 0;
    double s0 = 0.0;
    double T = 0.0;
    int n_nodes = 0;
    HermiteSeries<double> path;
    std::vector<MatC> pi0, pi1, pi2;     // s-Taylor coefficients of pi_{l(mu)}
    std::vector<std::vector<MatC>> proj; // all projectors on the ray [node][l]
    std::vector<VecD> lambda;            // eigenvalues on the ray [node]
    std::vector<double> xi;              // d_x varphi on the ray
    double node_t(int i) const { return T * double(i) / (n_nodes - 1); }
};

struct MultiplierSetup {
    const SystemModel* model = nullptr;
    const PhaseFamily* phases = nullptr;
    MultiplierOptions opt;
    std::vector<ChartOpData> charts;
    double delta_gap = 0.0;  // min eigenvalue gap over ray nodes
    double min_xi = 0.0;     // min |d_x varphi| over ray nodes
};

MultiplierSetup make_multiplier_setup(const SystemModel& model, const PhaseFamily& phases,
                                      const MultiplierOptions& opt = {});

struct FourierMultiplier {
    std::string tag;
    int k = 0;      // Taylor-equivalence degree of this representative
    int N = 0;
    std::function<MatC(const SpecIndex&, double, double)> coeff;
};

FourierMultiplier build_P(const MultiplierSetup& setup);
FourierMultiplier build_E(const MultiplierSetup& setup);
// Throws SmallDivisor when a transversal phase derivative is below the strict
// hyperbolicity margin. C_min (when requested) reports the certified bound.
FourierMultiplier build_Q(const MultiplierSetup& setup, double* C_min = nullptr);

// Coefficient-wise application to a grid profile.
GridProfile apply(const FourierMultiplier& M, const GridProfile& u);

// Structured application to chart profiles (the pipeline route; E uses the
// degree-2 Taylor representative, Q the frozen on-ray value).
ChartProfile apply_E_chart(const MultiplierSetup& setup, const ChartProfile& u);
ChartProfile apply_Q_chart(const MultiplierSetup& setup, const ChartProfile& u);

// Randomized oscillatory test profile with constant coefficients decaying as
// (1 + |(g,gamma)|)^{-8}.
std::map<SpecIndex, VecC> random_test_profile(int m, int N, int G,
                                              unsigned long long seed);

enum class IdentityKind { EE, PE, EP, PQ, QP };
std::string identity_label(IdentityKind k);

struct DefectSweep {
    std::string label;
    std::vector<double> eps;
    std::vector<double> sup;
};

// sup over the evaluation set of the identity defect applied to the test
// profile, for each epsilon; defects are measured in the multiplier
// normalization (coefficient times harmonic, no epsilon prefactor).
DefectSweep identity_sweep(const MultiplierSetup& setup, IdentityKind kind,
                           const std::map<SpecIndex, VecC>& test, const EvalSet& pts,
                           const std::vector<double>& eps);

// Class-stability: perturb a multiplier by amplitude * s^{k+1} * w(s) * D on
// Sigma_mu indices and sweep the difference applied to the test profile.
DefectSweep class_stability_sweep(const MultiplierSetup& setup, int k, double amplitude,
                                  const std::map<SpecIndex, VecC>& test, const EvalSet& pts,
                                  const std::vector<double>& eps,
                                  unsigned long long seed);

struct CoherenceReport {
    double max_scaled_det = 0.0; // max |det sigma(dPsi)| / |(g,gamma)|^N on rays
    bool pass = false;
};
CoherenceReport check_coherence(const MultiplierSetup& setup, double tol = 1e-8);

struct SeparationReport {
    double C_min = 0.0;
    double bound = 0.0;          // 0.9 * delta_gap * min |d_x varphi|
    bool pass = false;
};
SeparationReport check_separation(const MultiplierSetup& setup);

} // namespace cgo
