#include "doctest.h"

#include <fstream>
#include <sstream>

#include "cgo/config.hpp"
#include "cgo/model.hpp"

using namespace cgo;

TEST_SUITE_BEGIN("config");

static const char* minimal_s1 = R"cfg(
[system]
model = S1

[phases]
m = 1
psi_1 = "x + i*40*x^2"
zeros_1 = 0.0
branch_1 = 2
h_1_1 = "0.1"
h_1_2 = "0"
)cfg";

TEST_CASE("minimal registry config parses and resolves") {
    ModelConfig cfg = parse_config(minimal_s1);
    CHECK(cfg.registry == "S1");
    SystemModel m = make_system(cfg);
    CHECK(m.N == 2);
    CHECK(m.mode == Mode::Semilinear);
    CHECK(m.rho == doctest::Approx(1.2));
    REQUIRE(cfg.phases.size() == 1);
    CHECK(cfg.phases[0].branch == 2);
    // default geometric epsilon ladder
    REQUIRE(cfg.numerics.eps_list.size() == 5);
    CHECK(cfg.numerics.eps_list[0] == doctest::Approx(0.2));
    CHECK(cfg.numerics.eps_list[4] == doctest::Approx(0.0125));
}

TEST_CASE("custom system entries with an expression") {
    const char* text = R"cfg(
[system]
n = 2
mode = semilinear
a11 = "1 + 0.3*sin(x)"
a22 = "-1"
)cfg";
    ModelConfig cfg = parse_config(text);
    SystemModel m = make_system(cfg);
    VecC u = VecC::Zero(2);
    CHECK(std::abs(m.A_at(0, 0, u)(0, 0) - cplx(1.0, 0)) < 1e-15);
    CHECK(std::abs(m.A_at(0, M_PI / 2, u)(0, 0) - cplx(1.3, 0)) < 1e-12);
}

TEST_CASE("positioned error on a malformed entry") {
    const char* text = "[system]\nn = 2\nmode = semilinear\na11 = \"1 + *\"\n";
    try {
        parse_config(text);
        CHECK(false);
    } catch (const SyntaxError& e) {
        CHECK(e.line == 4);
    }
}

TEST_CASE("unknown keys are rejected") {
    CHECK_THROWS_AS(parse_config("[system]\nmodel = S1\nbogus = 1\n"), UnknownKey);
    CHECK_THROWS_AS(parse_config("[numerics]\ngg = 1\n"), UnknownKey);
}

TEST_CASE("type errors") {
    CHECK_THROWS_AS(parse_config("[system]\nmodel = S1\nrho = abc\n"), TypeMismatch);
    CHECK_THROWS_AS(parse_config("[system]\nmodel = S1\nrho = -1\n"), TypeMismatch);
    CHECK_THROWS_AS(parse_config("[system]\nn = 2\nmode = elliptic\n"), TypeMismatch);
}

TEST_CASE("serialize round trip compares equal") {
    ModelConfig cfg = parse_config(minimal_s1);
    ModelConfig cfg2 = parse_config(cfg.serialize());
    CHECK(config_equal(cfg, cfg2));
    // and a custom model too
    ModelConfig c3 = parse_config(R"cfg(
[system]
n = 2
mode = quasilinear
a11 = "1"
a12 = "0.5*conj(u1)"
a21 = "0.5*u1"
a22 = "-1"
f1 = "0.3*u1"
rho = 1.5

[numerics]
g = 6
eps = 0.1 0.05
)cfg");
    CHECK(config_equal(c3, parse_config(c3.serialize())));
}

TEST_SUITE_END();
