#pragma once

// Closed-loop simulation of x' = (A0 + K + R(t,x)) x + B0 u(x) under the
// synthesized feedback, with theta either re-solved from the state
// (algebraic mode) or carried as an extra state (augmented mode).

#include "cfsynth/model.hpp"
#include "cfsynth/synthesis.hpp"

#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace cfs
{

enum class IntegratorMethod
{
    Rk4Fixed,
    Rk45Adaptive
};

struct IntegratorConfig
{
    IntegratorMethod method = IntegratorMethod::Rk45Adaptive;
    double rtol = 1e-9;
    double atol = 1e-12;    // per component, times min(1, theta^(n-j+1))
    double max_step = 0.02; // also the rk4 step, which near the origin is capped at theta / 50
    double theta_stop = 1e-4;
    double t_max = 1e4;

    /// Throws DomainError when a field is out of range.
    void validate() const;
};

enum class SimulationMode
{
    Algebraic,
    Augmented
};

enum class Terminal
{
    ReachedOrigin,
    TMaxExceeded,
    LeftDomain
};

std::string to_string(IntegratorMethod method);
std::string to_string(SimulationMode mode);
std::string to_string(Terminal terminal);
IntegratorMethod integrator_method_from_string(const std::string& name);
SimulationMode simulation_mode_from_string(const std::string& name);

struct TrajectorySample
{
    double t = 0.0;
    Vector x;
    double theta = 0.0;
    Vector u;
    double theta_dot = 0.0; // instantaneous value of the analytic derivative
};

struct DeltaViolation
{
    double t = 0.0;
    int row = 0;
    int col = 0;
    double value = 0.0;
};

struct Trajectory
{
    std::vector<TrajectorySample> samples;
    SimulationMode mode = SimulationMode::Algebraic;
    Terminal terminal = Terminal::TMaxExceeded;
    double theta0 = 0.0;
    double settling_time = std::numeric_limits<double>::quiet_NaN();
    double delta_limit = 0.0;
    std::vector<DeltaViolation> violations; // first few hundred only
    long long violation_count = 0;
    long long accepted_steps = 0;
    long long rejected_steps = 0;

    bool complete() const { return terminal == Terminal::ReachedOrigin; }
};

struct TrajectorySummary
{
    double settling_time = std::numeric_limits<double>::quiet_NaN();
    double theta0 = 0.0;
    double time_bound = 0.0; // theta0 / gamma
    double max_u_norm = 0.0;
    double min_theta_dot = 0.0;
    double max_theta_dot = 0.0;
    long long violation_count = 0;
    Terminal terminal = Terminal::TMaxExceeded;
};

TrajectorySummary summarize(const Trajectory& traj, double gamma);

/// Integrates from x0 until theta <= config.theta_stop.
///
/// Throws DomainError if theta(x0) > art.c ("initial point outside
/// solvability ellipsoid"). Entries of R with |r| above `delta_limit`
/// (default: the perturbation's declared bound) are logged as violations,
/// never clipped.
Trajectory simulate(const SynthesisArtifacts& art, const PerturbationSpec& perturbation,
                    const Vector& x0, SimulationMode mode, const IntegratorConfig& config,
                    std::optional<double> delta_limit = std::nullopt);

struct SweepEntry
{
    double parameter = 0.0;
    std::optional<TrajectorySummary> summary;
    std::string error;
};

struct SweepResult
{
    std::vector<SweepEntry> entries;
    double min_settling_time = std::numeric_limits<double>::quiet_NaN();
    double max_settling_time = std::numeric_limits<double>::quiet_NaN();
};

using PerturbationFamily = std::function<PerturbationSpec(double parameter)>;

/// One simulation per grid value, run concurrently. A failed run is
/// recorded in its entry and does not stop the sweep.
SweepResult sweep(const SynthesisArtifacts& art, const PerturbationFamily& family,
                  const Vector& x0, const std::vector<double>& grid, SimulationMode mode,
                  const IntegratorConfig& config);

} // namespace cfs
