// pipeline.hpp — end-to-end orchestration of one configured model: validate,
// trace phases, solve the transport system, assemble the asymptotic solution,
// run the named defect sweeps, and emit the CSV artifacts.

#pragma once

#include "cgo/assembler.hpp"
#include "cgo/config.hpp"
#include "cgo/reference.hpp"
#include "cgo/sweep.hpp"

namespace cgo {

struct Pipeline {
    ModelConfig cfg;
    SystemModel model;
    ValidationReport vreport;
    Grid grid;
    PhaseFamily phases;
    double s0 = 0.0;
    std::vector<EikonalReport> eikonal; // per mode
    MultiplierSetup msetup;
    std::vector<TransportContext> ctxs;   // one per ray
    std::vector<PicardResult> transport;  // one per ray
    AsymptoticSolution asy;

    int p() const { return model.mode == Mode::Quasilinear ? 1 : 0; }
    EvalSet sweep_points(int lattice_stride = 4, int band_t = 21) const;
};

// Stage builders (each requires the previous stages).
Pipeline build_pipeline_phases(const ModelConfig& cfg);
void run_transport_stage(Pipeline& pl);
void run_assembly_stage(Pipeline& pl);
Pipeline build_pipeline(const ModelConfig& cfg);

// Named defect sweeps over the epsilon ladder of the config.
// Core set: PU0 (symbol action on U0), IEU0 ((I-E)U0), EN (E N(U0)),
// EUb (E Ubar - Ubar), resid (full nonlinear residual), init (datum mismatch).
SweepReport named_sweep(const Pipeline& pl, const std::string& name);
std::vector<std::string> core_sweep_names();

// Operator-identity and class-stability sweeps (gated in sweep_set = full).
std::vector<SweepReport> identity_sweeps(const Pipeline& pl);
std::vector<SweepReport> stability_sweeps(const Pipeline& pl);

// Lemma-type checks.
struct MaslovReport {
    long samples = 0;
    long violations = 0;
    double worst_margin = 0.0; // max of measured/bound over samples
};
MaslovReport check_maslov_bound(const Pipeline& pl, int n_samples = 10000);

std::vector<SweepReport> taylor_remainder_sweeps(const Pipeline& pl);

// Exponent/threshold table for every named claim.
double sweep_threshold(const Pipeline& pl, const std::string& label);

struct RunArtifacts {
    std::vector<SweepReport> reports;
    std::vector<std::string> notes;
    bool all_passed = true;
};

// Commands: check, phase, transport, assemble, sweep, compare, all.
RunArtifacts run_command(const ModelConfig& cfg, const std::string& command,
                         const std::string& out_dir);

// CSV artifact writers (deterministic apart from the stamped header line).
void write_phase_csv(const Pipeline& pl, const std::string& path);
void write_transport_csv(const Pipeline& pl, const std::string& path,
                         const std::string& history_path);
void write_profile_csv(const Pipeline& pl, const std::string& path);
void write_field_csv(const Pipeline& pl, const std::string& path,
                     const std::vector<double>& eps);
void write_report_csv(const std::vector<SweepReport>& reports, const std::string& path);
void write_summary(const RunArtifacts& art, const std::string& path);

} // namespace cgo
