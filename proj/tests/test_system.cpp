#include "doctest.h"

#include <random>

#include "cgo/system.hpp"

using namespace cgo;

TEST_SUITE_BEGIN("system");

namespace {
SystemModel custom(const std::string& body) {
    return make_system(parse_config("[system]\n" + body));
}
} // namespace

TEST_CASE("S1 validates: constant diagonal, cubic nonlinearity") {
    SystemModel m = make_registry_model("S1");
    ValidationReport rep = validate_system(m);
    CHECK(rep.passed);
    CHECK(rep.max_hermitian_deviation <= 1e-12);
    CHECK(rep.min_eigen_gap == doctest::Approx(2.0));
    CHECK(rep.F_at_zero_norm == 0.0);
}

TEST_CASE("exchange matrix: eigenvalues +-1, projectors (I +- X)/2") {
    SystemModel m = custom("n = 2\nmode = semilinear\na12 = \"1\"\na21 = \"1\"");
    ValidationReport rep = validate_system(m);
    CHECK(rep.min_eigen_gap == doctest::Approx(2.0));
    EigenData ed = eig_decompose_point(m, 0.0, 0.0);
    CHECK(ed.lambda[0] == doctest::Approx(-1.0));
    CHECK(ed.lambda[1] == doctest::Approx(1.0));
    MatC plus(2, 2);
    plus << 0.5, 0.5, 0.5, 0.5;
    CHECK((ed.proj[1] - plus).cwiseAbs().maxCoeff() < 1e-12);
    MatC minus(2, 2);
    minus << 0.5, -0.5, -0.5, 0.5;
    CHECK((ed.proj[0] - minus).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("strictly upper triangular A is rejected as non-Hermitian") {
    SystemModel m = custom("n = 2\nmode = semilinear\na12 = \"1\"");
    CHECK_THROWS_AS(validate_system(m), NonHermitian);
}

TEST_CASE("eigenvalue collision detection") {
    SystemModel m = custom("n = 2\nmode = semilinear\na11 = \"1\"\na22 = \"1\"");
    CHECK_THROWS_AS(validate_system(m), EigenvalueCollision);
}

TEST_CASE("diagonal case: ascending order and axis projectors") {
    SystemModel m = custom("n = 2\nmode = semilinear\na11 = \"2\"\na22 = \"-1\"");
    EigenData ed = eig_decompose_point(m, 0.0, 0.0);
    CHECK(ed.lambda[0] == doctest::Approx(-1.0));
    CHECK(ed.lambda[1] == doctest::Approx(2.0));
    CHECK((ed.proj[0] - MatC(VecC(Eigen::Vector2cd(0, 1)).asDiagonal())).cwiseAbs().maxCoeff() <
          1e-14);
    CHECK((ed.proj[1] - MatC(VecC(Eigen::Vector2cd(1, 0)).asDiagonal())).cwiseAbs().maxCoeff() <
          1e-14);
}

TEST_CASE("S3 top-branch slope alpha matches the analytic derivative") {
    SystemModel m = make_registry_model("S3");
    // analytic: lambda = 1 + 0.3 sin x, alpha = 0.3 cos x
    BranchDerivs bd = branch_derivs(m, m.N - 1, 0.0, 0.0);
    CHECK(bd.lambda == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(bd.alpha == doctest::Approx(0.3).epsilon(1e-6));
    BranchDerivs b2 = branch_derivs(m, m.N - 1, 0.1, 0.5);
    CHECK(b2.alpha == doctest::Approx(0.3 * std::cos(0.5)).epsilon(1e-6));
    CHECK(b2.beta == doctest::Approx(-0.3 * std::sin(0.5)).epsilon(1e-4));
}

TEST_CASE("principal symbol") {
    SystemModel m = make_registry_model("S1");
    // tau = 1, xi = 0 -> i I
    MatC s = symbol(m, 0.0, 0.0, cplx(1, 0), cplx(0, 0));
    CHECK((s - cplx(0, 1) * MatC::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-15);
    // characteristic covector: tau = -1, xi = 1 on the lambda = 1 branch
    MatC c = symbol(m, 0.0, 0.0, cplx(-1, 0), cplx(1, 0));
    CHECK(std::abs(c.determinant()) < 1e-14);
    CHECK_THROWS_AS(symbol(m, 0.0, 0.0, cplx(0, 0), cplx(0, 0)), std::invalid_argument);
    CHECK_THROWS_AS(symbol(m, 0.0, 5.0, cplx(1, 0), cplx(0, 0)), OutsideDomain);
}

TEST_CASE("symbol homogeneity of degree one at random covectors") {
    SystemModel m = make_registry_model("S3");
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ur(-1.0, 1.0);
    for (int i = 0; i < 50; ++i) {
        const double t = 0.25 * (ur(rng) + 1.0), x = 0.5 * ur(rng);
        const cplx tau(ur(rng), ur(rng)), xi(ur(rng) + 2.0, ur(rng));
        const MatC a = symbol(m, t, x, 2.0 * tau, 2.0 * xi);
        const MatC b = 2.0 * symbol(m, t, x, tau, xi);
        CHECK((a - b).cwiseAbs().maxCoeff() < 1e-14);
    }
}

TEST_CASE("determinant factorizes over the eigenvalues on grid nodes") {
    SystemModel m = make_registry_model("S3");
    Grid g;
    g.nt = 9;
    g.nx = 9;
    g.T = m.T;
    g.xbar = m.xbar;
    g.rho = m.rho;
    g.c = m.c;
    for (int i = 0; i < g.nt; ++i)
        for (int j = 0; j < g.nx; ++j) {
            const double t = g.t(i), x = g.x(j);
            if (!g.in_domain(t, x)) continue;
            EigenData ed = eig_decompose_point(m, t, x);
            const cplx tau(0.3, 0.1), xi(1.0, -0.2);
            cplx prod(1, 0);
            for (int l = 0; l < m.N; ++l) prod *= tau + ed.lambda[l] * xi;
            prod *= std::pow(cplx(0, 1), m.N);
            const cplx det = symbol(m, t, x, tau, xi).determinant();
            CHECK(std::abs(det - prod) <= 1e-10 * std::max(1.0, std::abs(prod)));
        }
}

TEST_CASE("grid eigen field: completeness and idempotence") {
    SystemModel m = make_registry_model("S3");
    Grid g;
    g.nt = 7;
    g.nx = 11;
    g.T = m.T;
    g.xbar = m.xbar;
    g.rho = m.rho;
    g.c = m.c;
    EigenField f = eig_decompose_grid(m, g);
    for (int i = 0; i < g.nt; ++i)
        for (int j = 0; j < g.nx; ++j) {
            const auto& pis = f.pis(i, j);
            MatC sum = MatC::Zero(m.N, m.N);
            MatC A0 = MatC::Zero(m.N, m.N);
            for (int l = 0; l < m.N; ++l) {
                sum += pis[l];
                A0 += f.lam(i, j)[l] * pis[l];
                CHECK((pis[l] * pis[l] - pis[l]).cwiseAbs().maxCoeff() < 1e-12);
                for (int l2 = 0; l2 < l; ++l2)
                    CHECK((pis[l] * pis[l2]).cwiseAbs().maxCoeff() < 1e-12);
            }
            CHECK((sum - MatC::Identity(m.N, m.N)).cwiseAbs().maxCoeff() < 1e-12);
            CHECK((A0 - m.A0(g.t(i), g.x(j))).cwiseAbs().maxCoeff() < 1e-10);
        }
}

TEST_CASE("semilinear mode requires F(t,x,0) = 0 and u-free A") {
    SystemModel bad = custom("n = 2\nmode = semilinear\na11 = \"1\"\na22 = \"-1\"\nf1 = \"1 + u1\"");
    CHECK_THROWS_AS(validate_system(bad), ValidationError);
    SystemModel bad2 =
        custom("n = 2\nmode = semilinear\na11 = \"1 + re(u1)\"\na22 = \"-1\"");
    CHECK_THROWS_AS(validate_system(bad2), ValidationError);
}

TEST_CASE("quasilinear mode requires the background to solve the system") {
    SystemModel bad = custom("n = 2\nmode = quasilinear\na11 = \"1\"\na22 = \"-1\"\nf1 = \"x\"");
    CHECK_THROWS_AS(validate_system(bad), BackgroundNotSolution);
    // S2 and S3 backgrounds are exact
    CHECK(validate_system(make_registry_model("S2")).background_residual <= 1e-10);
    CHECK(validate_system(make_registry_model("S3")).background_residual <= 1e-10);
}

TEST_CASE("linearized principal part annihilates constants") {
    SystemModel m = make_registry_model("S2");
    // L0 applied to a constant field: finite differences of a constant vanish
    const VecC cst = VecC::Constant(2, cplx(0.3, -0.1));
    const VecC res = m.L_residual(0.2, 0.1, m.u0_at(0.2, 0.1), VecC::Zero(2), VecC::Zero(2));
    CHECK(res.cwiseAbs().maxCoeff() < 1e-14); // F(u0) = 0 and no gradients
    (void)cst;
}

TEST_SUITE_END();
