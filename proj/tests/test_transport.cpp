#include "doctest.h"

#include <random>

#include "cgo/pipeline.hpp"

using namespace cgo;

TEST_SUITE_BEGIN("transport");

namespace {
Pipeline phases_of(const std::string& name) {
    return build_pipeline_phases(load_config_file(std::string(CGO_CONFIG_DIR) + "/" + name));
}

Pipeline custom_pipeline(const std::string& text) {
    return build_pipeline_phases(parse_config(text));
}

TransportContext ctx_of(Pipeline& pl, int ray = 0) {
    int r = 0;
    for (const auto& rep : pl.phases.reps)
        for (size_t l = 0; l < rep.rays.size(); ++l) {
            if (r == ray)
                return make_transport_context(pl.model, rep.rays[l], rep.odes[l],
                                              pl.phases.m(), pl.cfg.numerics.G,
                                              pl.cfg.numerics.rect_tol);
            ++r;
        }
    throw std::runtime_error("ray index out of range");
}
} // namespace

TEST_CASE("initial profile: single fundamental coefficient") {
    Pipeline pl = phases_of("s1.cfg");
    TransportContext ctx = ctx_of(pl);
    RayState H = initial_profile(ctx, pl.phases.data[0], 0);
    REQUIRE(H.c.size() == 1);
    const auto& [idx, v] = *H.c.begin();
    CHECK(idx == SpecIndex::fundamental(1, 0));
    CHECK(std::abs(v[0] - cplx(0.1, 0)) < 1e-12); // h(x_o) with x_o = 0
    CHECK(std::abs(v[1]) < 1e-15);
}

TEST_CASE("unpolarized data violate the admissibility condition") {
    Pipeline pl = phases_of("s1.cfg");
    TransportContext ctx = ctx_of(pl);
    PhaseData bad = pl.phases.data[0];
    bad.zeros[0].h = VecC(2);
    bad.zeros[0].h << cplx(0.1, 0), cplx(0.1, 0);
    CHECK_THROWS_AS(initial_profile(ctx, bad, 0), PolarizationViolated);
}

TEST_CASE("two modes produce two fundamentals without cross terms") {
    Pipeline pl = custom_pipeline(R"cfg(
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
)cfg");
    run_transport_stage(pl);
    REQUIRE(pl.transport.size() == 2);
    for (size_t r = 0; r < 2; ++r)
        for (const auto& st : pl.transport[r].states)
            for (const auto& [idx, v] : st.c) {
                CHECK(idx.sigma_mu() == int(r)); // no cross-phase indices
            }
}

TEST_CASE("free transport keeps the coefficients frozen") {
    Pipeline pl = phases_of("s0.cfg");
    run_transport_stage(pl);
    const auto& st = pl.transport[0].states;
    for (const auto& s : st) {
        REQUIRE(s.c.size() == 1);
        CHECK(std::abs(s.c.begin()->second[0] - cplx(0.3, 0)) < 1e-13);
    }
}

TEST_CASE("scalar damping: closed-form exponential decay and energy curve") {
    Pipeline pl = custom_pipeline(R"cfg(
[system]
n = 2
mode = semilinear
a11 = "1"
a22 = "-1"
f1 = "0.4*u1"
f2 = "0.4*u2"

[phases]
m = 1
psi_1 = "x + i*40*x^2"
zeros_1 = 0.0
branch_1 = 2
h_1_1 = "0.1"
h_1_2 = "0"
)cfg");
    run_transport_stage(pl);
    const auto& pr = pl.transport[0];
    const int n = int(pr.states.size());
    for (int i = 0; i < n; ++i) {
        const double t = pr.T_effective * i / (n - 1);
        const cplx got = pr.states[i].c.begin()->second[0];
        CHECK(std::abs(got - 0.1 * std::exp(-0.4 * t)) < 1e-8);
    }
    // the linear problem converges after a single corrective solve
    REQUIRE(pr.deltas.size() >= 2);
    CHECK(pr.deltas[1] <= 1e-10);
    CHECK(pr.max_energy_ratio <= 1.05);
}

TEST_CASE("cubic self-interaction: geometric contraction on small data") {
    Pipeline pl = phases_of("s1.cfg");
    run_transport_stage(pl);
    const auto& pr = pl.transport[0];
    REQUIRE(pr.deltas.size() >= 2);
    // ||U_3 - U_2|| / ||U_2 - U_1||
    const double ratio = pr.deltas[1] / pr.deltas[0];
    CHECK(ratio <= 0.5);
    CHECK(pr.direct_diff <= 1e-8);
    CHECK(pr.max_energy_ratio <= 1.05);
    CHECK(pr.rect_mass == 0.0);
}

TEST_CASE("quasilinear second-harmonic model: picard agrees with direct integration") {
    Pipeline pl = phases_of("s2.cfg");
    run_transport_stage(pl);
    CHECK(pl.transport[0].direct_diff <= 1e-8);
    CHECK(pl.transport[0].rect_mass == 0.0);
    CHECK(pl.transport[0].T_effective == doctest::Approx(0.5));
}

TEST_CASE("burgers-type coupling produces the (2,2) index before projection") {
    Pipeline pl = phases_of("s2.cfg");
    TransportContext ctx = ctx_of(pl);
    RayState H = initial_profile(ctx, pl.phases.data[0], 0);
    RayState N = transport_nonlinearity(ctx, 0, H, H);
    CHECK(N.c.count(SpecIndex({2}, {2})) == 1);
    // and the second-harmonic content sits in the coupled third... second component
    const VecC v = N.c.at(SpecIndex({2}, {2}));
    CHECK(std::abs(v[0]) < 1e-15);
    CHECK(std::abs(v[1]) > 1e-6);
}

TEST_CASE("cubic spectrum enumeration stays oscillatory") {
    Pipeline pl = phases_of("s1.cfg");
    TransportContext ctx = ctx_of(pl);
    RayState U;
    VecC a(2), b(2);
    a << cplx(0.1, 0.02), cplx(0.05, 0);
    U.c.emplace(SpecIndex::fundamental(1, 0), a);
    RayState N = transport_nonlinearity(ctx, 0, U, U);
    CHECK(!N.c.empty());
    for (const auto& [idx, v] : N.c) {
        CHECK(idx.oscillatory());
        CHECK(!idx.zero_g());
    }
}

TEST_CASE("a rectifying nonlinearity is detected and rejected") {
    Pipeline pl = custom_pipeline(R"cfg(
[system]
n = 1
mode = semilinear
a11 = "1"
f1 = "u1*conj(u1)"

[phases]
m = 1
psi_1 = "x + i*40*x^2"
zeros_1 = 0.0
branch_1 = 1
h_1_1 = "0.1"
)cfg");
    CHECK_THROWS_AS(run_transport_stage(pl), RectificationDetected);
}

TEST_CASE("large data trigger the local-time halving") {
    Pipeline pl = custom_pipeline(R"cfg(
[system]
n = 1
mode = semilinear
a11 = "1"
f1 = "3*u1^2*conj(u1)"
k_radius = 40

[phases]
m = 1
psi_1 = "x + i*40*x^2"
zeros_1 = 0.0
branch_1 = 1
h_1_1 = "4.0"

[numerics]
g = 32
picard_max = 25
)cfg");
    run_transport_stage(pl);
    // the rising-delta guard fires and shrinks the horizon until the
    // iteration contracts on the local existence interval
    CHECK(pl.transport[0].halvings >= 1);
    CHECK(pl.transport[0].T_effective < 0.1);
    CHECK(pl.transport[0].deltas.back() <= 1e-10);
    CHECK(pl.transport[0].direct_diff <= 1e-2); // few steps remain after halving
}

TEST_CASE("polarization and spectrum confinement hold at every node") {
    Pipeline pl = phases_of("s3.cfg");
    run_transport_stage(pl);
    TransportContext ctx = ctx_of(pl);
    const auto& st = pl.transport[0].states;
    double tail = 0.0, peak = 0.0;
    for (size_t i = 0; i < st.size(); ++i) {
        const int j = int(2 * i); // half-node index
        for (const auto& [idx, v] : st[i].c) {
            CHECK(idx.sigma_mu() == 0);
            CHECK(idx.gamma[0] <= pl.cfg.numerics.G);
            CHECK((ctx.pi[j] * v - v).cwiseAbs().maxCoeff() <= 1e-10);
            peak = std::max(peak, v.cwiseAbs().maxCoeff());
            if (idx.gamma[0] == pl.cfg.numerics.G)
                tail = std::max(tail, v.cwiseAbs().maxCoeff());
        }
    }
    CHECK(tail <= 1e-6 * peak);
}

TEST_CASE("energy estimate envelope holds for the linearized solves") {
    Pipeline pl = phases_of("s1.cfg");
    TransportContext ctx = ctx_of(pl);
    RayState H = initial_profile(ctx, pl.phases.data[0], 0);
    // frozen coefficients at a nontrivial state
    std::vector<RayState> V(ctx.steps + 1, H * 1.0);
    LinearSolveResult ls = linear_step_solve(ctx, V, H);
    CHECK(ls.max_energy_ratio <= 1.05);
    CHECK(ls.energy.front() > 0);
    for (double e : ls.energy) CHECK(std::isfinite(e));
}

TEST_CASE("step-halving self-check of the transport integration") {
    Pipeline pl = phases_of("s1.cfg");
    const auto& rep = pl.phases.reps[0];
    RayTraceOptions fine;
    fine.steps = 800;
    Ray ray2 = trace_ray(pl.model, rep.rays[0].branch, pl.phases.data[0].zeros[0].x0, 0, 0,
                         fine);
    ray2.s0 = rep.rays[0].s0;
    PhaseOde ode2 = solve_phase_ode(pl.model, ray2, pl.phases.data[0].zeros[0], 800);
    TransportContext c1 = make_transport_context(pl.model, rep.rays[0], rep.odes[0], 1,
                                                 pl.cfg.numerics.G, 1e-12);
    TransportContext c2 =
        make_transport_context(pl.model, ray2, ode2, 1, pl.cfg.numerics.G, 1e-12);
    RayState H = initial_profile(c1, pl.phases.data[0], 0);
    const auto coarse = direct_solve(c1, H);
    const auto refined = direct_solve(c2, H);
    double diff = 0.0;
    for (size_t i = 0; i < coarse.size(); ++i)
        diff = std::max(diff, state_distance(coarse[i], refined[2 * i]));
    CHECK(diff <= 1e-8);
}

TEST_CASE("injection to the double torus and back is the identity") {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> gauss(0, 1);
    RayState u;
    for (int g = 1; g <= 3; ++g) {
        VecC v(2);
        v << cplx(gauss(rng), gauss(rng)), cplx(gauss(rng), gauss(rng));
        u.c.emplace(SpecIndex({g}, {g + (g % 2)}), v);
    }
    RayState back = j_inverse(j_map(u));
    CHECK(state_distance(u, back) == 0.0);
    // the projector filters non-oscillatory double-torus content
    PeriodicState p = j_map(u);
    VecC w(2);
    w << cplx(1, 0), cplx(0, 0);
    p.c.emplace(SpecIndex({0}, {2}), w);  // g = 0
    p.c.emplace(SpecIndex({3}, {1}), w);  // |g| > h
    RayState filtered = j_inverse(p);
    CHECK(state_distance(u, filtered) == 0.0);
}

TEST_CASE("periodic-side convolution agrees with a hand computation") {
    // conjugacy of the nonlinear maps: the coefficient convolution used by the
    // transport right-hand side must match the plain double-torus product
    Pipeline pl = phases_of("s1.cfg");
    TransportContext ctx = ctx_of(pl);
    RayState U;
    VecC a(2), b(2);
    a << cplx(0.2, 0.0), cplx(0, 0);
    b << cplx(0.0, 0.1), cplx(0, 0);
    U.c.emplace(SpecIndex({1}, {1}), a);
    U.c.emplace(SpecIndex({1}, {3}), b);
    RayState N = transport_nonlinearity(ctx, 0, U, U);
    // hand convolution of F_1 = u1^2 conj(u1) + conj(u1) u2^2 with u2 = 0:
    // coefficient at (1,5): 3 * [a a conj(a) at gamma 1+1+3] -> combinations
    // (a,b,conj a) + (b,a,conj a) + (a,a,conj b)
    const cplx a1 = a[0], b1 = b[0];
    const cplx expect_15 = 2.0 * a1 * b1 * std::conj(a1) + a1 * a1 * std::conj(b1);
    REQUIRE(N.c.count(SpecIndex({1}, {5})) == 1);
    CHECK(std::abs(N.c.at(SpecIndex({1}, {5}))[0] - expect_15) < 1e-14);
    // and at (1,3): a^2 conj(a)
    const cplx expect_13 = a1 * a1 * std::conj(a1);
    CHECK(std::abs(N.c.at(SpecIndex({1}, {3}))[0] - expect_13) < 1e-14);
}

TEST_CASE("constant-in-s extension reproduces the ray values under the cutoff") {
    Pipeline pl = phases_of("s1.cfg");
    run_transport_stage(pl);
    ChartProfile ub = extend_off_ray(pl.ctxs[0], pl.transport[0].states);
    const SpecIndex idx = SpecIndex::fundamental(1, 0);
    for (double t : {0.0, 0.21, 0.47}) {
        const double xr = ub.path.eval(t);
        // on the ray: exactly the transported coefficient
        const MatC v = ub.eval(idx, t, xr);
        const RayState& nearest =
            pl.transport[0].states[std::min<size_t>(std::lround(t / 0.5 * 400),
                                                    pl.transport[0].states.size() - 1)];
        CHECK((VecC(v) - nearest.c.at(idx)).cwiseAbs().maxCoeff() < 1e-6);
        // vanishes outside the chart support
        CHECK(ub.eval(idx, t, xr + 0.25).cwiseAbs().maxCoeff() == 0.0);
        CHECK(ub.eval(idx, t, xr - 0.25).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_SUITE_END();
