#pragma once

// Machine-checkable certificates: algebraic identities of the synthesis,
// total positivity of the Gramian kernel, trajectory guarantees and the
// reproduction of the coupled-pendulum reference numbers.

#include "cfsynth/simulator.hpp"
#include "cfsynth/synthesis.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace cfs
{

enum class CheckStatus
{
    Pass,
    Fail,
    Warn
};

std::string to_string(CheckStatus status);

struct Check
{
    std::string name;
    CheckStatus status = CheckStatus::Pass;
    double measured = 0.0;
    double threshold = 0.0;
    std::string reference; // the claim being checked
    std::vector<std::pair<std::string, double>> details;
};

struct Certificate
{
    std::vector<Check> checks;

    bool passed() const;
    std::size_t count(CheckStatus status) const;
    const Check* find(const std::string& name) const;

    /// Adds a pass/fail check: pass iff measured <= threshold.
    Check& require_at_most(std::string name, double measured, double threshold,
                           std::string reference);
    void append(const Certificate& other);
};

nlohmann::json to_json(const Certificate& cert);
void print_table(std::ostream& os, const Certificate& cert);

/// Lyapunov-type identity, D-conjugation identities at each theta, the two
/// F1 formulas and entrywise positivity of F; all 1e-10 relative.
Certificate check_identities(const SynthesisArtifacts& art, const std::vector<double>& thetas);

/// Every minor of the kernel 1/((2n-m-j+1)(2n-m-j+2)) is positive for each
/// block size up to n_max (<= 5), consecutive minors of the two Cauchy
/// factors match the closed-form Cauchy determinant, and the exact inverse
/// Gramian blocks are entrywise positive.
Certificate check_total_positivity(int n_max);

/// Finite-difference central estimates of theta'(t) on the recorded samples
/// (one-sided at the ends).
std::vector<double> finite_difference_theta_dot(const Trajectory& traj);

/// (a) theta' <= -gamma + 5e-3, (b) |u| <= 1 + 1e-9, (c) T <= theta0/gamma,
/// (d) no bound violations, (e) augmented theta matches the re-solved one
/// to 1e-6, (f) theta strictly decreasing. Throws DomainError for an
/// incomplete trajectory.
Certificate certify_trajectory(const Trajectory& traj, const SynthesisArtifacts& art,
                               double gamma, double delta);

/// Reference numbers with per-entry tolerance, read from a versioned JSON file.
struct Expectation
{
    enum class Mode
    {
        Absolute, // |measured - expected| <= tolerance
        Truncate, // measured truncated to `digits` decimals equals expected
        Range     // lo <= measured <= hi
    };

    std::string name;
    Mode mode = Mode::Absolute;
    double expected = 0.0;
    double tolerance = 0.0;
    int digits = 0;
    double lo = 0.0;
    double hi = 0.0;
    bool warn_only = false;
    std::string claim;
};

struct Expectations
{
    int version = 0;
    std::vector<Expectation> entries;
    std::map<std::string, double> inputs; // values the reference runs were made with
    Matrix displayed_gtilde; // the comparison matrix as printed, if present

    const Expectation& at(const std::string& name) const;
    double input(const std::string& name) const;
};

Expectations load_expectations(const std::filesystem::path& path);
Expectations parse_expectations(const nlohmann::json& doc);
std::filesystem::path default_expectations_path();

Check compare(const Expectation& expectation, double measured);

struct ReproductionOptions
{
    IntegratorConfig integrator;
    std::vector<double> stiffness_grid{0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0};
    std::vector<double> length_grid{30.0, 60.0, 120.0, 300.0};
};

/// Recomputes every reference number of both pendulum cases and compares
/// them with the expectations. The comparison-matrix spectral radius is
/// always reported as a warning carrying the computed, displayed-matrix
/// and printed values.
Certificate check_pendulum_reproduction(const Expectations& expectations,
                                        const ReproductionOptions& options);

} // namespace cfs
