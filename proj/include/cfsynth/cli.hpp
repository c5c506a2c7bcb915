#pragma once

// Command implementations behind the cfsynth executable. Argument parsing
// lives in the tool; everything here is callable from tests.

#include "cfsynth/robustness.hpp"
#include "cfsynth/simulator.hpp"
#include "cfsynth/synthesis.hpp"
#include "cfsynth/verify.hpp"

#include <json.hpp>

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace cfs::cli
{

inline constexpr const char* version = "1.0.0";

enum ExitCode : int
{
    exit_ok = 0,
    exit_certification = 1,
    exit_config = 2,
    exit_domain = 3
};

/// Invalid configuration; `pointer` is the JSON pointer of the offending field.
class ConfigError : public std::runtime_error
{
public:
    ConfigError(std::string pointer, const std::string& message)
        : std::runtime_error(pointer + ": " + message), pointer_(std::move(pointer))
    {
    }
    const std::string& pointer() const { return pointer_; }

private:
    std::string pointer_;
};

struct TermConfig
{
    int row = 0; // zero-based after parsing
    int col = 0;
    std::optional<Family> family; // falls back to the perturbation family
    std::optional<double> amplitude; // falls back to delta
    double omega = 1.0;
    double phase = 0.0;
    int state = 0;
};

struct PerturbationConfig
{
    MaskKind kind = MaskKind::Superdiagonal;
    std::optional<double> delta;     // nullopt means "margin"
    std::string family = "constant"; // constant | sinusoid | saturating | random | none
    std::vector<TermConfig> terms;   // empty: every entry of the mask
};

struct RunConfig
{
    std::vector<int> blocks;
    Matrix K;
    PerturbationConfig perturbation;
    double gamma = 0.5;
    std::optional<double> c;  // nullopt means "auto"
    std::optional<double> a0; // nullopt means "max"
    std::optional<Vector> x0;
    IntegratorConfig integrator;
    SimulationMode mode = SimulationMode::Algebraic;
    unsigned long long seed = 0;
    std::vector<double> sweep_scales{0.0, 0.25, 0.5, 0.75, 1.0};
};

/// Throws ConfigError naming the failing field.
RunConfig parse_run_config(const nlohmann::json& doc);
RunConfig load_run_config(const std::filesystem::path& path);

/// Everything a command needs, with "auto", "max" and "margin" resolved.
struct Resolved
{
    RunConfig config;
    SynthesisArtifacts art;
    RobustnessBound bound;
    PerturbationSpec perturbation;
    double delta = 0.0; // declared bound of the realized perturbation
    std::vector<std::string> warnings;
};

Resolved resolve(const RunConfig& config);

/// Resolved a0, c, Delta, gamma and the tool version.
nlohmann::json provenance(const Resolved& r);

/// Infinity and NaN become the strings "inf", "-inf", "nan".
nlohmann::json number(double v);
nlohmann::json matrix_json(const Matrix& M);

std::string trajectory_csv(const Trajectory& traj);
nlohmann::json trajectory_json(const Trajectory& traj);
nlohmann::json summary_json(const Trajectory& traj, double gamma);

/// Writes through a temporary file in the same directory and renames it.
void write_atomic(const std::filesystem::path& path, const std::string& content);

enum class Format
{
    Csv,
    Json
};

struct Context
{
    std::optional<std::filesystem::path> config;
    std::filesystem::path out = ".";
    Format format = Format::Csv;
    bool plot = false;
    std::optional<unsigned long long> seed;
    std::optional<std::filesystem::path> expectations;
    std::ostream* stdout_stream = nullptr;
    std::ostream* stderr_stream = nullptr;
};

struct PendulumOptions
{
    std::string which;           // case1 | case2
    std::optional<double> k0;    // case1 realized stiffness (default k_max)
    std::optional<double> length; // case2 realized length (default l_min)
    std::optional<double> c;      // ellipsoid level (default: the computed radius)
    std::optional<double> a0;
    SimulationMode mode = SimulationMode::Algebraic;
};

// Each returns the process exit code and never throws.
int cmd_synth(const Context& ctx);
int cmd_delta(const Context& ctx);
int cmd_simulate(const Context& ctx);
int cmd_sweep(const Context& ctx);
int cmd_verify(const Context& ctx);
int cmd_pendulum(const Context& ctx, const PendulumOptions& options);

} // namespace cfs::cli
