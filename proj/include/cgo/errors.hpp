// errors.hpp — exception families used across the library.
// Exit-code families for the CLI: 1 config, 2 validation, 3 phase,
// 4 transport, 5 sweep failure.

#pragma once

#include <stdexcept>
#include <string>

namespace cgo {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Positioned parse error (1-based line/column).
struct SyntaxError : ConfigError {
    int line = 0;
    int column = 0;
    SyntaxError(const std::string& msg, int l, int c)
        : ConfigError(msg + " at " + std::to_string(l) + ":" + std::to_string(c)),
          line(l), column(c) {}
};

struct UnknownKey : ConfigError {
    using ConfigError::ConfigError;
};

struct TypeMismatch : ConfigError {
    using ConfigError::ConfigError;
};

struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NonHermitian : ValidationError {
    using ValidationError::ValidationError;
};
struct EigenvalueCollision : ValidationError {
    using ValidationError::ValidationError;
};
struct BackgroundNotSolution : ValidationError {
    using ValidationError::ValidationError;
};

struct PhaseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct RayEscapesLaterally : PhaseError {
    using PhaseError::PhaseError;
};
struct RayCollision : PhaseError {
    using PhaseError::PhaseError;
};
struct ImaginaryPartCollapse : PhaseError {
    using PhaseError::PhaseError;
};
struct FloorViolated : PhaseError {
    using PhaseError::PhaseError;
};
struct OrderTooLow : PhaseError {
    using PhaseError::PhaseError;
};

struct AlgebraError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ShapeMismatch : AlgebraError {
    using AlgebraError::AlgebraError;
};
struct OutsideDomain : AlgebraError {
    using AlgebraError::AlgebraError;
};
struct AliasingDetected : AlgebraError {
    using AlgebraError::AlgebraError;
};

struct TransportError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct PolarizationViolated : TransportError {
    using TransportError::TransportError;
};
struct RectificationDetected : TransportError {
    using TransportError::TransportError;
};
struct EnergyBlowup : TransportError {
    using TransportError::TransportError;
};
struct NoContraction : TransportError {
    using TransportError::TransportError;
};
struct BoundaryStencil : TransportError {
    using TransportError::TransportError;
};

struct SweepError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct SlopeBelowThreshold : SweepError {
    using SweepError::SweepError;
};
struct NoisyFit : SweepError {
    using SweepError::SweepError;
};
struct SmallDivisor : SweepError {
    using SweepError::SweepError;
};
struct CFLViolation : SweepError {
    using SweepError::SweepError;
};
struct SelfConvergenceFailed : SweepError {
    using SweepError::SweepError;
};

// CLI exit-code family for an exception type.
int exit_code_for(const std::exception& e);

} // namespace cgo
