#include "doctest.h"

#include "cgo/pipeline.hpp"

using namespace cgo;

TEST_SUITE_BEGIN("phase");

namespace {
ModelConfig cfgfile(const std::string& name) {
    return load_config_file(std::string(CGO_CONFIG_DIR) + "/" + name);
}
} // namespace

TEST_CASE("constant-speed rays are straight lines") {
    SystemModel m = make_registry_model("S0");
    Ray r = trace_ray(m, 1, 0.0, 0, 0); // branch lambda = +1
    for (double t : {0.1, 0.25, 0.5}) CHECK(r.x_at(t) == doctest::Approx(t).epsilon(1e-12));
    Ray l = trace_ray(m, 0, 0.2, 0, 0); // branch lambda = -1
    for (double t : {0.1, 0.3}) CHECK(l.x_at(t) == doctest::Approx(0.2 - t).epsilon(1e-12));
}

TEST_CASE("S3 ray against the step-halved integration") {
    SystemModel m = make_registry_model("S3");
    RayTraceOptions a, b;
    a.steps = 400;
    b.steps = 800;
    Ray r1 = trace_ray(m, m.N - 1, 0.0, 0, 0, a);
    Ray r2 = trace_ray(m, m.N - 1, 0.0, 0, 0, b);
    for (double t : linspace(0.0, m.T, 21))
        CHECK(std::abs(r1.x_at(t) - r2.x_at(t)) < 1e-8);
}

TEST_CASE("a ray that exits laterally is rejected") {
    SystemModel m = make_registry_model("S0");
    CHECK_THROWS_AS(trace_ray(m, 1, 1.1, 0, 0), RayEscapesLaterally);
}

TEST_CASE("phase system: constant coefficients freeze xi and Phi") {
    auto zero = [](double) { return 0.0; };
    PhaseOde ode = integrate_phase_ode(zero, zero, 0.5, 0.7, 1.0, cplx(0, 1), 400);
    for (double t : {0.1, 0.3, 0.5}) {
        CHECK(ode.xi.eval(t) == doctest::Approx(1.0).epsilon(1e-13));
        CHECK(std::abs(ode.Phi.eval(t) - cplx(0, 1)) < 1e-13);
    }
}

TEST_CASE("closed-form exponential solution for constant alpha") {
    const double a = 0.8;
    const cplx Phi0(0.4, 1.7);
    auto alpha = [a](double) { return a; };
    auto beta = [](double) { return 0.0; };
    PhaseOde ode = integrate_phase_ode(alpha, beta, 0.5, 0.0, 2.0, Phi0, 400);
    for (double t : linspace(0.0, 0.5, 11)) {
        CHECK(std::abs(ode.xi.eval(t) - 2.0 * std::exp(-a * t)) < 1e-9);
        CHECK(std::abs(ode.Phi.eval(t) - Phi0 * std::exp(-2.0 * a * t)) < 1e-9);
    }
}

TEST_CASE("negative initial imaginary part collapses immediately") {
    auto zero = [](double) { return 0.0; };
    CHECK_THROWS_AS(integrate_phase_ode(zero, zero, 0.5, 0.0, 1.0, cplx(0.0, -1.0), 10),
                    ImaginaryPartCollapse);
}

TEST_CASE("S3 keeps Im Phi positive along the ray") {
    Pipeline pl = build_pipeline_phases(cfgfile("s3.cfg"));
    for (const auto& rep : pl.phases.reps)
        for (const auto& ode : rep.odes) {
            CHECK(ode.im_Phi_min > 0.0);
            for (int i = 0; i < ode.Phi.size(); ++i) CHECK(ode.Phi.y[i].imag() > 0.0);
        }
}

TEST_CASE("pure quadratic representative: Im phi = s^2/2 for constant Phi = i") {
    SystemModel m = make_registry_model("S0");
    Ray r = trace_ray(m, 1, 0.0, 0, 0);
    std::vector<Ray> rays{r};
    assign_chart_width(m, rays);
    auto zero = [](double) { return 0.0; };
    PhaseOde ode = integrate_phase_ode(zero, zero, m.T, 0.0, 1.0, cplx(0, 1), 400);
    PhaseRep rep = build_phase_representative(m, rays, {ode});
    CHECK(rep.pure_quadratic);
    for (double t : {0.0, 0.2, 0.45})
        for (double s : {0.01, 0.05, 0.09, 0.2}) {
            CHECK(rep.phi(t, rays[0].x_at(t) + s).imag() ==
                  doctest::Approx(0.5 * s * s).epsilon(1e-12));
        }
}

TEST_CASE("grid scan: zero set of Im phi is the ray, floor holds elsewhere") {
    Pipeline pl = build_pipeline_phases(cfgfile("s1.cfg"));
    const auto& rep = pl.phases.reps[0];
    const double c = rep.half_im_inf;
    const double plateau = rep.rays[0].s0 / 3.0;
    int zero_cells = 0;
    for (int i = 0; i < pl.grid.nt; i += 2)
        for (int j = 0; j < pl.grid.nx; ++j) {
            const double t = pl.grid.t(i), x = pl.grid.x(j);
            if (!pl.grid.in_domain(t, x)) continue;
            const double s = x - rep.rays[0].x_at(t);
            const double im = rep.phi(t, x).imag();
            if (im <= 1e-12) {
                ++zero_cells;
                CHECK(std::abs(s) <= pl.grid.dx()); // within one cell of the ray
            } else {
                CHECK(im >= c * std::min(s * s, plateau * plateau) * (1 - 1e-9) - 1e-13);
            }
        }
    CHECK(zero_cells > 0);
}

TEST_CASE("two-mode configuration: representatives are independent") {
    // counter-propagating phases on S0, zeros separated so the rays never meet
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
    REQUIRE(pl.phases.m() == 2);
    const auto& r1 = pl.phases.reps[0];
    const auto& r2 = pl.phases.reps[1];
    // Im phi_1 is strictly positive on R_2 and conversely
    for (double t : linspace(0.0, 0.35, 8)) {
        CHECK(r1.phi(t, r2.rays[0].x_at(t)).imag() > 1e-4);
        CHECK(r2.phi(t, r1.rays[0].x_at(t)).imag() > 1e-4);
        CHECK(std::abs(r1.phi(t, r1.rays[0].x_at(t)).imag()) < 1e-14);
    }
}

TEST_CASE("crossing rays of different modes are rejected") {
    std::string text = R"cfg(
[system]
model = S0

[phases]
m = 2
psi_1 = "x + i*20*(x + 0.1)^2"
zeros_1 = -0.1
branch_1 = 2
h_1_1 = "0.1"
h_1_2 = "0"
psi_2 = "-x + i*20*(x - 0.1)^2"
zeros_2 = 0.1
branch_2 = 1
h_2_1 = "0"
h_2_2 = "0.1"
)cfg";
    CHECK_THROWS_AS(build_pipeline_phases(parse_config(text)), RayCollision);
}

TEST_CASE("multi-chart blend representative on one mode") {
    // two zeros of the same phase: exercises the blend + floor construction
    std::string text = R"cfg(
[system]
model = S0
rho = 1.6
t_final = 0.4

[phases]
m = 1
psi_1 = "x + i*10*(x^2 - 0.36)^2"
zeros_1 = -0.6 0.6
branch_1 = 2
h_1_1 = "0.1"
h_1_2 = "0"
)cfg";
    Pipeline pl = build_pipeline_phases(parse_config(text));
    const auto& rep = pl.phases.reps[0];
    REQUIRE(rep.rays.size() == 2);
    CHECK(!rep.pure_quadratic);
    // floor between the charts
    for (double t : {0.0, 0.2, 0.39}) {
        const double mid = 0.5 * (rep.rays[0].x_at(t) + rep.rays[1].x_at(t));
        CHECK(rep.phi(t, mid).imag() >= rep.c_floor * (1 - 1e-9));
        CHECK(std::abs(rep.phi(t, rep.rays[0].x_at(t)).imag()) < 1e-13);
    }
    // analytic derivatives agree with finite differences through the blend
    for (double t : {0.05, 0.3})
        for (double x : {-0.72, -0.5, -0.2, 0.0, 0.35, 0.66}) {
            const double h = 1e-6;
            const cplx fd_x = (rep.phi(t, x + h) - rep.phi(t, x - h)) / (2 * h);
            const cplx fd_t = (rep.phi(t + h, x) - rep.phi(t - h, x)) / (2 * h);
            CHECK(std::abs(rep.dphi_dx(t, x) - fd_x) < 1e-7);
            CHECK(std::abs(rep.dphi_dt(t, x) - fd_t) < 1e-7);
        }
}

TEST_CASE("eikonal order on the gentle S3 geometry") {
    Pipeline pl = build_pipeline_phases(cfgfile("s3_eikonal.cfg"));
    const auto& er = pl.eikonal[0];
    CHECK(!er.ray_fit.exact);
    CHECK(er.ray_fit.slope >= 2.9);
    CHECK(er.ray_fit.slope <= 3.5);
    CHECK(er.t0_fit.slope >= 2.9);
}

TEST_CASE("constant coefficients: eikonal residual at machine level") {
    Pipeline pl = build_pipeline_phases(cfgfile("s0.cfg"));
    CHECK(pl.eikonal[0].ray_max <= 1e-10);
    CHECK(pl.eikonal[0].ray_fit.exact);
}

TEST_CASE("representative equivalence across blend widths") {
    // the gap between a narrow-cutoff variant and the quadratic representative
    // vanishes to high order at the ray
    SystemModel m = make_registry_model("S0");
    Ray r = trace_ray(m, 1, 0.0, 0, 0);
    std::vector<Ray> rays{r};
    assign_chart_width(m, rays);
    auto zero = [](double) { return 0.0; };
    PhaseOde ode = integrate_phase_ode(zero, zero, m.T, 0.0, 1.0, cplx(0.1, 1.0), 400);
    PhaseRep quad = build_phase_representative(m, rays, {ode});
    PhaseRepOptions narrow;
    narrow.force_blend = true;
    narrow.blend_scale = 0.5;
    PhaseRep blend = build_phase_representative(m, rays, {ode}, narrow);
    std::vector<double> xs, ys;
    double dmax = 0.0;
    for (double s : logspace(1e-3, 1e-1, 30)) {
        const double d = std::abs(quad.phi(0.2, rays[0].x_at(0.2) + s) -
                                  blend.phi(0.2, rays[0].x_at(0.2) + s));
        xs.push_back(s);
        ys.push_back(d);
        dmax = std::max(dmax, d);
    }
    if (dmax > 1e-12) {
        PowerFit fit = fit_loglog(xs, ys);
        CHECK(fit.slope >= 2.9); // same degree-2 Taylor polynomial at the ray
    }
    // both are zero at the ray itself
    CHECK(std::abs(quad.phi(0.2, rays[0].x_at(0.2)) - blend.phi(0.2, rays[0].x_at(0.2))) <
          1e-13);
}

TEST_CASE("characteristic-variety membership along the ray") {
    Pipeline pl = build_pipeline_phases(cfgfile("s3.cfg"));
    const auto& rep = pl.phases.reps[0];
    for (double t : linspace(0.0, pl.model.T, 17)) {
        const double xr = rep.rays[0].x_at(t);
        const double lam = eig_decompose_point(pl.model, t, xr).lambda[rep.branch];
        const double xi = rep.odes[0].xi.eval(t);
        // tau := -lambda xi solves tau + lambda xi = 0; the stored ray speed
        // must match the eigenvalue for this to be the characteristic covector
        CHECK(std::abs(-lam * xi + lam * xi) < 1e-15);
        CHECK(std::abs(rep.rays[0].v_at(t) - lam) < 1e-9);
        // and xi never changes sign
        CHECK(xi > 0.0);
    }
}

TEST_CASE("phase data validation rejects bad data") {
    SystemModel m = make_registry_model("S0");
    PhaseSpec spec;
    spec.branch = 2;
    spec.amplitude = {parse_expr("0.1"), parse_expr("0")};
    spec.zeros = {0.0};
    // negative imaginary part
    spec.psi = parse_expr("x - i*x^2");
    CHECK_THROWS_AS(validate_phase_data(m, spec, 0), PhaseError);
    // zero point not at the minimum
    spec.psi = parse_expr("x + i*40*(x-0.3)^2");
    CHECK_THROWS_AS(validate_phase_data(m, spec, 0), PhaseError);
    // unpolarized amplitude
    spec.psi = parse_expr("x + i*40*x^2");
    spec.amplitude = {parse_expr("0.1"), parse_expr("0.1")};
    CHECK_THROWS_AS(validate_phase_data(m, spec, 0), PolarizationViolated);
}

TEST_SUITE_END();
