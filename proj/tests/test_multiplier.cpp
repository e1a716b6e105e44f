#include "doctest.h"

#include "cgo/pipeline.hpp"

using namespace cgo;

TEST_SUITE_BEGIN("multiplier");

namespace {
Pipeline phases_of(const std::string& name) {
    return build_pipeline_phases(load_config_file(std::string(CGO_CONFIG_DIR) + "/" + name));
}
} // namespace

TEST_CASE("E is the cutoff projector on Sigma_mu indices") {
    Pipeline pl = phases_of("s3.cfg");
    FourierMultiplier E = build_E(pl.msetup);
    const auto& cd = pl.msetup.charts[0];
    const SpecIndex idx = SpecIndex::fundamental(1, 0);
    // on a ray node the cutoff plateau gives exactly the spectral projector
    const double t = 0.25;
    const double xr = cd.path.eval(t);
    const MatC pi = eig_decompose_point(pl.model, t, xr).proj[cd.branch];
    CHECK((E.coeff(idx, t, xr) - pi).cwiseAbs().maxCoeff() < 1e-9);
    CHECK((E.coeff(idx, t, xr) * E.coeff(idx, t, xr) - E.coeff(idx, t, xr))
              .cwiseAbs()
              .maxCoeff() < 1e-12);
    // far from the ray the coefficient vanishes
    CHECK(E.coeff(idx, t, xr + 0.9).cwiseAbs().maxCoeff() == 0.0);
    CHECK(E.coeff(idx, t, xr - 0.9).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("indices outside the union of Sigma_mu take the configured value") {
    // two-mode configuration so a doubly-damped index exists
    std::string text = R"cfg(
[system]
model = S0
t_final = 0.35

[phases]
m = 2
psi_1 = "x + i*20*(x + 0.5)^2"
zeros_1 = -0.5
branch_1 = 2
h_1_1 = "0.1"
h_1_2 = "0"
psi_2 = "-x + i*20*(x - 0.5)^2"
zeros_2 = 0.5
branch_2 = 1
h_2_1 = "0"
h_2_2 = "0.1"
)cfg";
    Pipeline pl = build_pipeline_phases(parse_config(text));
    SpecIndex cross({1, 1}, {1, 1}); // gamma has two nonzero entries
    REQUIRE(cross.sigma_mu() == -1);
    FourierMultiplier E = build_E(pl.msetup);
    CHECK((E.coeff(cross, 0.1, 0.0) - MatC::Identity(2, 2)).cwiseAbs().maxCoeff() == 0.0);
    MultiplierSetup zero_setup = pl.msetup;
    zero_setup.opt.e_outside = "zero";
    FourierMultiplier E0 = build_E(zero_setup);
    CHECK(E0.coeff(cross, 0.1, 0.0).cwiseAbs().maxCoeff() == 0.0);
    // Q vanishes there regardless
    FourierMultiplier Q = build_Q(pl.msetup);
    CHECK(Q.coeff(cross, 0.1, 0.0).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("P annihilates the polarized direction on the ray (exact eikonal case)") {
    Pipeline pl = phases_of("s1.cfg");
    FourierMultiplier P = build_P(pl.msetup);
    const auto& cd = pl.msetup.charts[0];
    const SpecIndex idx = SpecIndex::fundamental(1, 0);
    for (double t : {0.0, 0.2, 0.45}) {
        const double xr = cd.path.eval(t);
        const EigenData ed = eig_decompose_point(pl.model, t, xr);
        const VecC pol = ed.proj[cd.branch].col(0); // spans the eigendirection
        CHECK((P.coeff(idx, t, xr) * pol).cwiseAbs().maxCoeff() < 1e-10);
    }
}

TEST_CASE("P inherits degree-one homogeneity in the index") {
    Pipeline pl = phases_of("s3.cfg");
    FourierMultiplier P = build_P(pl.msetup);
    const SpecIndex idx({1}, {3});
    const SpecIndex idx2({2}, {6});
    const MatC a = P.coeff(idx2, 0.2, 0.3);
    const MatC b = 2.0 * P.coeff(idx, 0.2, 0.3);
    CHECK((a - b).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("Q: closed form on constant coefficients, 1/g decay, -i convention") {
    Pipeline pl = phases_of("s1.cfg");
    FourierMultiplier Q = build_Q(pl.msetup);
    const auto& cd = pl.msetup.charts[0];
    const double t = 0.3;
    const double xr = cd.path.eval(t);
    const double xi = pl.phases.reps[0].odes[0].xi.eval(t);
    const EigenData ed = eig_decompose_point(pl.model, t, xr);
    for (int g = 1; g <= 6; ++g) {
        SpecIndex idx({g}, {g});
        // single transversal branch: V Psi = g (lambda_other - lambda) xi = -2 g xi
        const MatC expect =
            cplx(0, -1) * ed.proj[0] / (double(g) * (ed.lambda[0] - ed.lambda[1]) * xi);
        CHECK((Q.coeff(idx, t, xr) - expect).cwiseAbs().maxCoeff() < 1e-10);
        // coefficient magnitude decays exactly like 1/g
        CHECK(Q.coeff(idx, t, xr).norm() * g ==
              doctest::Approx(Q.coeff(SpecIndex({1}, {1}), t, xr).norm()).epsilon(1e-9));
    }
}

TEST_CASE("small-divisor guard") {
    Pipeline pl = phases_of("s1.cfg");
    MultiplierSetup corrupt = pl.msetup;
    corrupt.delta_gap *= 1e6; // inflate the certified margin beyond reality
    CHECK_THROWS_AS(build_Q(corrupt), SmallDivisor);
}

TEST_CASE("apply: identity and zero multipliers") {
    Pipeline pl = phases_of("s1.cfg");
    GridProfile u;
    u.grid = pl.grid;
    u.grid.nt = 9;
    u.grid.nx = 9;
    u.m = 1;
    u.G = 4;
    u.rows = 2;
    u.cols = 1;
    VecC v(2);
    v << cplx(0.3, 0.1), cplx(-0.2, 0.4);
    u.set_constant(SpecIndex({1}, {1}), v);
    FourierMultiplier id;
    id.tag = "custom";
    id.N = 2;
    id.coeff = [](const SpecIndex&, double, double) { return MatC(MatC::Identity(2, 2)); };
    GridProfile same = apply(id, u);
    CHECK((same.coeffs.at(SpecIndex({1}, {1}))[0] - v).cwiseAbs().maxCoeff() == 0.0);
    FourierMultiplier zero;
    zero.tag = "custom";
    zero.N = 2;
    zero.coeff = [](const SpecIndex&, double, double) { return MatC(MatC::Zero(2, 2)); };
    GridProfile z = apply(zero, u);
    CHECK(z.coeffs.at(SpecIndex({1}, {1}))[0].cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("coherence and separation on the reference manifold") {
    Pipeline pl = phases_of("s3.cfg");
    const CoherenceReport cr = check_coherence(pl.msetup);
    CHECK(cr.pass);
    CHECK(cr.max_scaled_det <= 1e-8);
    const SeparationReport sr = check_separation(pl.msetup);
    CHECK(sr.pass);
    CHECK(sr.C_min >= sr.bound);
    CHECK(sr.bound == doctest::Approx(0.9 * pl.msetup.delta_gap * pl.msetup.min_xi));
}

TEST_CASE("exact plane+quadratic phases: PE defect identically small") {
    Pipeline pl = phases_of("s1.cfg");
    const auto test = random_test_profile(1, 2, 6, 123);
    EvalSet pts = pl.sweep_points(8, 9);
    const DefectSweep ds =
        identity_sweep(pl.msetup, IdentityKind::PE, test, pts, {0.2, 0.05});
    for (double s : ds.sup) CHECK(s <= 1e-10);
}

TEST_CASE("zero perturbation produces a zero stability defect") {
    Pipeline pl = phases_of("s1.cfg");
    const auto test = random_test_profile(1, 2, 6, 123);
    EvalSet pts = pl.sweep_points(8, 9);
    const DefectSweep ds = class_stability_sweep(pl.msetup, 2, 0.0, test, pts, {0.1}, 7);
    CHECK(ds.sup[0] == 0.0);
}

TEST_CASE("identity sweeps on the focused variable-coefficient geometry") {
    Pipeline pl = phases_of("s3_identities.cfg");
    std::vector<SweepReport> reps = identity_sweeps(pl);
    for (const auto& rep : reps) {
        INFO(rep.verdict());
        CHECK(rep.passed);
        if (rep.label == "EE-E" || rep.label == "PE") {
            CHECK(!rep.noisy);
            if (!rep.exact && !rep.superpoly) {
                CHECK(rep.fit.slope >= 1.4);
                CHECK(rep.fit.r2 >= 0.97);
            }
        }
    }
}

TEST_CASE("both out-of-spectrum conventions pass the identity sweeps") {
    // the coefficient outside the union of the Sigma_mu can be set to the
    // identity or to zero; neither choice affects the certified orders
    ModelConfig cfg = load_config_file(std::string(CGO_CONFIG_DIR) + "/s3_identities.cfg");
    cfg.numerics.e_outside = "zero";
    Pipeline pl = build_pipeline_phases(cfg);
    for (auto& rep : identity_sweeps(pl)) {
        INFO(rep.verdict());
        CHECK(rep.passed);
    }
}

TEST_SUITE_END();
