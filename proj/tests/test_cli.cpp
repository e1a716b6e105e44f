#include "doctest.h"

#include <filesystem>
#include <fstream>
#include <sstream>

#include "cgo/pipeline.hpp"

using namespace cgo;

TEST_SUITE_BEGIN("cli");

namespace {
ModelConfig cfgfile(const std::string& name) {
    return load_config_file(std::string(CGO_CONFIG_DIR) + "/" + name);
}

std::string slurp_after_header(const std::string& path) {
    std::ifstream in(path);
    REQUIRE(bool(in));
    std::string line, rest;
    std::getline(in, line); // stamped header line
    std::ostringstream os;
    os << in.rdbuf();
    return os.str();
}
} // namespace

TEST_CASE("check command validates and exits cleanly") {
    RunArtifacts art = run_command(cfgfile("s1.cfg"), "check", "out/test_check");
    CHECK(art.all_passed);
    CHECK(!art.notes.empty());
}

TEST_CASE("unknown command belongs to the config error family") {
    CHECK_THROWS_AS(run_command(cfgfile("s1.cfg"), "frobnicate", "out/x"), ConfigError);
    try {
        run_command(cfgfile("s1.cfg"), "frobnicate", "out/x");
    } catch (const std::exception& e) {
        CHECK(exit_code_for(e) == 1);
    }
}

TEST_CASE("exit code families") {
    CHECK(exit_code_for(SyntaxError("x", 1, 1)) == 1);
    CHECK(exit_code_for(NonHermitian("x")) == 2);
    CHECK(exit_code_for(EigenvalueCollision("x")) == 2);
    CHECK(exit_code_for(ImaginaryPartCollapse("x")) == 3);
    CHECK(exit_code_for(RayCollision("x")) == 3);
    CHECK(exit_code_for(RectificationDetected("x")) == 4);
    CHECK(exit_code_for(EnergyBlowup("x")) == 4);
    CHECK(exit_code_for(SlopeBelowThreshold("x")) == 5);
    CHECK(exit_code_for(NoisyFit("x")) == 5);
}

TEST_CASE("a deliberately broken phase datum fails with the phase family") {
    ModelConfig cfg = cfgfile("s1.cfg");
    cfg.phases[0].psi = parse_expr("x - i*80*x^2"); // Im d2 psi < 0
    bool threw = false;
    try {
        run_command(cfg, "sweep", "out/test_broken");
    } catch (const std::exception& e) {
        threw = true;
        CHECK(exit_code_for(e) == 3);
    }
    CHECK(threw);
}

TEST_CASE("artifacts are deterministic apart from the stamped header") {
    ModelConfig cfg = cfgfile("s0.cfg");
    run_command(cfg, "sweep", "out/det_a");
    run_command(cfg, "sweep", "out/det_b");
    CHECK(slurp_after_header("out/det_a/report.csv") ==
          slurp_after_header("out/det_b/report.csv"));
    CHECK(slurp_after_header("out/det_a/summary.txt") ==
          slurp_after_header("out/det_b/summary.txt"));
}

TEST_CASE("phase command writes the phase dump") {
    run_command(cfgfile("s0.cfg"), "phase", "out/test_phase");
    const std::string body = slurp_after_header("out/test_phase/phase.csv");
    CHECK(body.find("re_phi_1") != std::string::npos);
    CHECK(body.find(",") != std::string::npos);
}

TEST_CASE("transport command writes the trajectory and history dumps") {
    run_command(cfgfile("s1.cfg"), "transport", "out/test_transport");
    CHECK(std::filesystem::exists("out/test_transport/transport.csv"));
    CHECK(std::filesystem::exists("out/test_transport/picard_history.csv"));
    const std::string hist = slurp_after_header("out/test_transport/picard_history.csv");
    CHECK(hist.find("ray,nu,delta") != std::string::npos);
}

TEST_SUITE_END();
