#include "cfsynth/simulator.hpp"

#include "cfsynth/robustness.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <limits>

namespace cfs
{

void IntegratorConfig::validate() const
{
    if (!(rtol >= 1e-13))
        throw DomainError("rtol must be at least 1e-13");
    if (!(atol > 0.0))
        throw DomainError("atol must be positive");
    if (!(max_step > 0.0))
        throw DomainError("max_step must be positive");
    if (!(theta_stop > 0.0))
        throw DomainError("theta_stop must be positive");
    if (!(t_max > 0.0))
        throw DomainError("t_max must be positive");
}

std::string to_string(IntegratorMethod method)
{
    return method == IntegratorMethod::Rk4Fixed ? "rk4-fixed" : "rk45-adaptive";
}

std::string to_string(SimulationMode mode)
{
    return mode == SimulationMode::Algebraic ? "algebraic" : "augmented";
}

std::string to_string(Terminal terminal)
{
    switch (terminal)
    {
    case Terminal::ReachedOrigin:
        return "reached-origin";
    case Terminal::TMaxExceeded:
        return "t_max-exceeded";
    case Terminal::LeftDomain:
        return "left-domain";
    }
    return "t_max-exceeded";
}

IntegratorMethod integrator_method_from_string(const std::string& name)
{
    if (name == "rk4-fixed")
        return IntegratorMethod::Rk4Fixed;
    if (name == "rk45-adaptive")
        return IntegratorMethod::Rk45Adaptive;
    throw DomainError("unknown integrator method '" + name + "'");
}

SimulationMode simulation_mode_from_string(const std::string& name)
{
    if (name == "algebraic")
        return SimulationMode::Algebraic;
    if (name == "augmented")
        return SimulationMode::Augmented;
    throw DomainError("unknown simulation mode '" + name + "'");
}

namespace
{

constexpr std::size_t max_logged_violations = 256;

class ClosedLoop
{
public:
    ClosedLoop(const SynthesisArtifacts& art, const PerturbationSpec& perturbation,
               SimulationMode mode, double delta_limit, Trajectory& traj)
        : art_(art), perturbation_(perturbation), mode_(mode), limit_(delta_limit),
          traj_(traj), n_(art.dim()), drift_(art.system.A0 + art.system.K)
    {
    }

    int state_size() const { return mode_ == SimulationMode::Augmented ? n_ + 1 : n_; }

    // theta for a (possibly trial) state; algebraic mode re-solves.
    double theta_of(const Vector& z)
    {
        if (mode_ == SimulationMode::Augmented)
            return z[n_];
        return solve_theta_near(art_, z.head(n_), hint_).theta;
    }

    void set_hint(double theta) { hint_ = theta; }

    // Absolute-tolerance weight of component i. x_j of a block of size n
    // scales like theta^(n-j+1), so a fixed atol loses all control of the
    // deep coordinates near the origin.
    double atol_weight(Eigen::Index i) const
    {
        if (i >= n_)
            return 1.0;
        const BlockStructure& b = art_.blocks();
        const int row = static_cast<int>(i);
        const int power = b.size(b.block_of(row)) - b.position(row) + 1;
        return std::clamp(std::pow(hint_, power), std::numeric_limits<double>::min(), 1.0);
    }

    Vector rhs(double t, const Vector& z)
    {
        const Vector x = z.head(n_);
        const double theta = theta_of(z);
        perturbation_.evaluate(t, x, R_);
        record_violations(t);

        Vector dz(state_size());
        const Vector u = control_at(art_, x, theta);
        dz.head(n_) = (drift_ + R_) * x + art_.system.B0 * u;
        if (mode_ == SimulationMode::Augmented)
            dz[n_] = theta > 0.0 && x.squaredNorm() > 0.0 ? theta_dot_at(art_, R_, x, theta) : 0.0;
        return dz;
    }

    TrajectorySample sample(double t, const Vector& z)
    {
        TrajectorySample s;
        s.t = t;
        s.x = z.head(n_);
        s.theta = theta_of(z);
        s.u = control_at(art_, s.x, s.theta);
        perturbation_.evaluate(t, s.x, R_);
        s.theta_dot = s.theta > 0.0 && s.x.squaredNorm() > 0.0
                          ? theta_dot_at(art_, R_, s.x, s.theta)
                          : -1.0;
        return s;
    }

private:
    void record_violations(double t)
    {
        const double tolerance = limit_ * (1.0 + 1e-12) + 1e-300;
        for (int m = 0; m < n_; ++m)
            for (int j = 0; j < n_; ++j)
            {
                const double value = R_(m, j);
                if (std::abs(value) <= tolerance)
                    continue;
                ++traj_.violation_count;
                if (traj_.violations.size() < max_logged_violations)
                    traj_.violations.push_back({t, m, j, value});
            }
    }

    const SynthesisArtifacts& art_;
    const PerturbationSpec& perturbation_;
    SimulationMode mode_;
    double limit_;
    Trajectory& traj_;
    int n_;
    Matrix drift_;
    Matrix R_;
    double hint_ = 0.0;
};

// Dormand-Prince 5(4) tableau.
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                 e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;

struct StepResult
{
    Vector z;
    double error = 0.0; // scaled RMS error, <= 1 accepts
};

StepResult dopri_step(ClosedLoop& sys, double t, const Vector& z, double h,
                      const IntegratorConfig& cfg)
{
    const Vector k1 = sys.rhs(t, z);
    const Vector k2 = sys.rhs(t + c2 * h, z + h * a21 * k1);
    const Vector k3 = sys.rhs(t + c3 * h, z + h * (a31 * k1 + a32 * k2));
    const Vector k4 = sys.rhs(t + c4 * h, z + h * (a41 * k1 + a42 * k2 + a43 * k3));
    const Vector k5 = sys.rhs(t + c5 * h, z + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    const Vector k6 =
        sys.rhs(t + h, z + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    StepResult out;
    out.z = z + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    const Vector k7 = sys.rhs(t + h, out.z);
    const Vector err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    double sum = 0.0;
    for (Eigen::Index i = 0; i < z.size(); ++i)
    {
        const double scale = cfg.atol * sys.atol_weight(i) + cfg.rtol * std::max(std::abs(z[i]), std::abs(out.z[i]));
        sum += (err[i] / scale) * (err[i] / scale);
    }
    out.error = std::sqrt(sum / static_cast<double>(z.size()));
    return out;
}

Vector rk4_step(ClosedLoop& sys, double t, const Vector& z, double h)
{
    const Vector k1 = sys.rhs(t, z);
    const Vector k2 = sys.rhs(t + 0.5 * h, z + 0.5 * h * k1);
    const Vector k3 = sys.rhs(t + 0.5 * h, z + 0.5 * h * k2);
    const Vector k4 = sys.rhs(t + h, z + h * k3);
    return z + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

} // namespace

Trajectory simulate(const SynthesisArtifacts& art, const PerturbationSpec& perturbation,
                    const Vector& x0, SimulationMode mode, const IntegratorConfig& config,
                    std::optional<double> delta_limit)
{
    config.validate();
    const int n = art.dim();
    if (x0.size() != n)
        throw DomainError("initial state has dimension " + std::to_string(x0.size()) +
                          ", expected " + std::to_string(n));
    if (perturbation.dim() != n)
        throw DomainError("perturbation dimension does not match the system");

    Trajectory traj;
    traj.mode = mode;
    traj.delta_limit = delta_limit.value_or(perturbation.bound());
    traj.theta0 = solve_theta(art, x0);
    if (traj.theta0 > art.c)
        throw DomainError("initial point outside solvability ellipsoid: theta(x0) = " +
                          std::to_string(traj.theta0) + " > c = " + std::to_string(art.c));

    ClosedLoop sys(art, perturbation, mode, traj.delta_limit, traj);
    Vector z(sys.state_size());
    z.head(n) = x0;
    if (mode == SimulationMode::Augmented)
        z[n] = traj.theta0;
    sys.set_hint(traj.theta0);

    double t = 0.0;
    double theta = traj.theta0;
    traj.samples.push_back(sys.sample(t, z));
    if (theta <= config.theta_stop)
    {
        traj.terminal = Terminal::ReachedOrigin;
        traj.settling_time = theta;
        return traj;
    }

    double h = std::min(config.max_step, 1e-2 * std::max(theta, config.theta_stop));
    const double c_limit = art.c * (1.0 + 1e-6);
    while (true)
    {
        if (t >= config.t_max)
        {
            traj.terminal = Terminal::TMaxExceeded;
            return traj;
        }
        h = std::min({h, config.max_step, config.t_max - t});
        if (h < 1e-14 * std::max(1.0, t))
        {
            if (theta <= 10.0 * config.theta_stop)
            {
                traj.terminal = Terminal::ReachedOrigin;
                traj.settling_time = t + theta;
                return traj;
            }
            throw NumericalError("integrator step underflow at t = " + std::to_string(t) +
                                 " with theta = " + std::to_string(theta));
        }

        Vector next;
        double h_used = h;
        if (config.method == IntegratorMethod::Rk45Adaptive)
        {
            const StepResult step = dopri_step(sys, t, z, h, config);
            if (!(step.error <= 1.0) || !step.z.allFinite())
            {
                ++traj.rejected_steps;
                h *= std::isfinite(step.error) ? std::max(0.2, 0.9 * std::pow(step.error, -0.2))
                                               : 0.2;
                continue;
            }
            next = step.z;
            h *= step.error > 0.0 ? std::clamp(0.9 * std::pow(step.error, -0.2), 0.2, 5.0) : 5.0;
        }
        else
        {
            next = rk4_step(sys, t, z, h);
            if (!next.allFinite())
                throw NumericalError("rk4 step produced a non-finite state at t = " +
                                     std::to_string(t));
            h = config.max_step;
        }

        const double t_prev = t;
        const double theta_prev = theta;
        t += h_used;
        ++traj.accepted_steps;
        z = std::move(next);
        theta = sys.theta_of(z);
        sys.set_hint(theta);
        traj.samples.push_back(sys.sample(t, z));

        if (theta > c_limit)
        {
            traj.terminal = Terminal::LeftDomain;
            return traj;
        }
        if (theta <= config.theta_stop)
        {
            // First crossing of theta_stop, then the last slope carries theta to 0.
            const double slope = (theta - theta_prev) / (t - t_prev);
            const double crossing =
                t_prev + (t - t_prev) * (theta_prev - config.theta_stop) / (theta_prev - theta);
            traj.terminal = Terminal::ReachedOrigin;
            traj.settling_time = slope < 0.0 ? crossing + config.theta_stop / -slope : crossing;
            return traj;
        }
        // The feedback has a 1/theta time scale; keep steps below it. Without
        // error control rk4 needs a much finer fraction.
        h = std::min(h, (config.method == IntegratorMethod::Rk4Fixed ? 0.02 : 0.5) * theta);
    }
}

TrajectorySummary summarize(const Trajectory& traj, double gamma)
{
    TrajectorySummary s;
    s.settling_time = traj.settling_time;
    s.theta0 = traj.theta0;
    s.time_bound = traj.theta0 / gamma;
    s.terminal = traj.terminal;
    s.violation_count = traj.violation_count;
    if (traj.samples.empty())
        return s;
    s.min_theta_dot = traj.samples.front().theta_dot;
    s.max_theta_dot = traj.samples.front().theta_dot;
    for (const auto& sample : traj.samples)
    {
        s.max_u_norm = std::max(s.max_u_norm, sample.u.norm());
        s.min_theta_dot = std::min(s.min_theta_dot, sample.theta_dot);
        s.max_theta_dot = std::max(s.max_theta_dot, sample.theta_dot);
    }
    return s;
}

SweepResult sweep(const SynthesisArtifacts& art, const PerturbationFamily& family,
                  const Vector& x0, const std::vector<double>& grid, SimulationMode mode,
                  const IntegratorConfig& config)
{
    std::vector<std::future<SweepEntry>> jobs;
    jobs.reserve(grid.size());
    for (double parameter : grid)
    {
        jobs.push_back(std::async(std::launch::async, [&, parameter] {
            SweepEntry entry;
            entry.parameter = parameter;
            try
            {
                const PerturbationSpec perturbation = family(parameter);
                const Trajectory traj = simulate(art, perturbation, x0, mode, config);
                entry.summary = summarize(traj, art.gamma);
                if (!traj.complete())
                    entry.error = "terminated: " + to_string(traj.terminal);
            }
            catch (const std::exception& e)
            {
                entry.error = e.what();
            }
            return entry;
        }));
    }

    SweepResult result;
    for (auto& job : jobs)
    {
        SweepEntry entry = job.get();
        if (entry.summary && entry.error.empty())
        {
            const double T = entry.summary->settling_time;
            if (std::isnan(result.min_settling_time) || T < result.min_settling_time)
                result.min_settling_time = T;
            if (std::isnan(result.max_settling_time) || T > result.max_settling_time)
                result.max_settling_time = T;
        }
        result.entries.push_back(std::move(entry));
    }
    return result;
}

} // namespace cfs
