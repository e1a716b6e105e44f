// sweep.hpp — epsilon-sweep order fitting: every O(eps^q) estimate becomes a
// measured sup-norm ladder with a log-log slope, an R^2 gate, and a pass
// threshold pinned to the claimed exponent.

#pragma once

#include <functional>
#include <string>
#include <vector>

#include "cgo/numerics.hpp"

namespace cgo {

struct SweepReport {
    std::string label;
    std::vector<double> eps;
    std::vector<double> sup;
    PowerFit fit;
    double threshold = 0.0;   // required slope
    double r2_gate = 0.97;
    bool exact = false;       // identically-zero defect, no fit
    bool superpoly = false;   // decays faster than any fitted power (O(eps^inf))
    bool noisy = false;       // fit rejected by the R^2 gate
    bool passed = false;

    std::string verdict() const;
};

// Assemble a report from measured sup norms (eps sorted descending inside).
SweepReport make_sweep_report(const std::string& label, std::vector<double> eps,
                              std::vector<double> sup, double threshold,
                              double r2_gate = 0.97, double zero_floor = 1e-14);

// Evaluate a defect functional over the ladder and fit.
SweepReport run_sweep(const std::string& label,
                      const std::function<double(double)>& sup_of_eps,
                      const std::vector<double>& eps, double threshold,
                      double r2_gate = 0.97, double zero_floor = 1e-14);

// Throwing assertion used by the gated CLI paths.
void require_pass(const SweepReport& rep);

} // namespace cgo
