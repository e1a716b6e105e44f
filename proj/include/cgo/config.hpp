// config.hpp — run configuration: INI-style sections with typed access,
// plus the structured ModelConfig consumed by the pipeline.

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cgo/errors.hpp"
#include "cgo/expr.hpp"

namespace cgo {

// Raw parsed file: section -> key -> (value text, line).
struct RawConfig {
    struct Value {
        std::string text;
        int line = 0;
    };
    std::map<std::string, std::map<std::string, Value>> sections;

    bool has(const std::string& sec, const std::string& key) const;
    const Value* find(const std::string& sec, const std::string& key) const;
};

RawConfig parse_raw_config(const std::string& text);

// One initial phase: complex datum exp(i psi/eps) with amplitude h.
struct PhaseSpec {
    Expr psi;                       // function of x, complex-valued
    std::vector<double> zeros;      // interior zeros of Im psi
    int branch = 1;                 // 1-based index into ascending eigenvalues
    std::vector<Expr> amplitude;    // N components, functions of x
};

struct NumericsConfig {
    int grid_nt = 201;
    int grid_nx = 201;
    int G = 8;                      // spectrum truncation: gamma_mu <= G
    double s0_override = 0.0;       // 0 = auto
    int rk_steps = 400;
    double rect_tol = 1e-12;
    double picard_tol = 1e-10;
    int picard_max = 40;
    std::vector<double> eps_list;   // default geometric ladder
    unsigned long long seed = 20240811ull;
    std::string e_outside = "identity";      // {identity, zero}
    std::string e_representative = "taylor2"; // {taylor2, fullfield}
    std::string sweep_set = "core";          // none: diagnostics only;
                                             // core: gate the profile sweeps;
                                             // full: gate the identity sweeps too
    double eig_fd_step = 0.0;       // 0 = auto (1e-3 * rho)
};

struct RunConfig {
    std::string out_dir = "out";
    std::string command = "all";
};

struct ModelConfig {
    // [system]; geometry fields are optional so registry defaults can apply
    std::string registry;           // nonempty = registry model key
    int N = 0;
    std::string mode;               // quasilinear | semilinear
    std::map<std::string, Expr> system_entries; // Aij, Fi, u0i as expressions
    std::optional<double> T, xbar, rho, c, K_radius;

    std::vector<PhaseSpec> phases;
    NumericsConfig numerics;
    RunConfig run;

    // Reconstruct a config file body; parse_config(serialize()) compares equal.
    std::string serialize() const;
};

ModelConfig parse_config(const std::string& text);
ModelConfig load_config_file(const std::string& path);

bool config_equal(const ModelConfig& a, const ModelConfig& b);

} // namespace cgo
