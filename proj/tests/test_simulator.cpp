#include "cfsynth/simulator.hpp"

#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace cfs;

namespace
{

SynthesisArtifacts make(const std::vector<int>& sizes, double c = 1.0, double gamma = 0.5,
                        Matrix K = Matrix())
{
    const BlockStructure b(sizes);
    if (K.size() == 0)
        K = Matrix::Zero(b.dim(), b.dim());
    return synthesize(CanonicalSystem::make(b, K), {c, gamma, std::nullopt});
}

Vector point_at_level(const SynthesisArtifacts& art, Vector x, double level)
{
    const double s = level / solve_theta(art, x);
    const BlockStructure& b = art.blocks();
    for (int i = 0; i < art.dim(); ++i)
        x(i) *= std::pow(s, b.size(b.block_of(i)) - b.position(i) + 1);
    return x;
}

} // namespace

TEST_CASE("integrator configuration is validated")
{
    IntegratorConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    cfg.rtol = 1e-16;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
    cfg = {};
    cfg.max_step = 0.0;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
    cfg = {};
    cfg.theta_stop = -1.0;
    CHECK_THROWS_AS(cfg.validate(), DomainError);
}

TEST_CASE("enum names round-trip")
{
    for (auto m : {IntegratorMethod::Rk4Fixed, IntegratorMethod::Rk45Adaptive})
        CHECK(integrator_method_from_string(to_string(m)) == m);
    for (auto m : {SimulationMode::Algebraic, SimulationMode::Augmented})
        CHECK(simulation_mode_from_string(to_string(m)) == m);
    CHECK_THROWS_AS(simulation_mode_from_string("hybrid"), DomainError);
}

TEST_CASE("unperturbed motion: theta(t) = theta0 - t")
{
    const SynthesisArtifacts art = make({3, 2}, 2.0, 0.5);
    Vector x(5);
    x << 0.3, -0.2, 0.1, 0.4, -0.5;
    x = point_at_level(art, x, 1.8);
    const PerturbationSpec none = PerturbationSpec::zero(art.blocks(), MaskKind::General);
    for (auto method : {IntegratorMethod::Rk45Adaptive, IntegratorMethod::Rk4Fixed})
    {
        IntegratorConfig cfg;
        cfg.method = method;
        cfg.max_step = method == IntegratorMethod::Rk4Fixed ? 0.005 : 0.02;
        const Trajectory traj = simulate(art, none, x, SimulationMode::Algebraic, cfg);
        REQUIRE(traj.complete());
        CHECK(traj.theta0 == doctest::Approx(1.8).epsilon(1e-10));
        double gap = 0.0;
        for (const auto& s : traj.samples)
        {
            gap = std::max(gap, std::abs(s.theta - (traj.theta0 - s.t)));
            CHECK(s.theta_dot == doctest::Approx(-1.0).epsilon(1e-9));
            CHECK(s.u.norm() <= 1.0 + 1e-12);
        }
        CHECK(gap <= 1e-6);
        CHECK(traj.settling_time == doctest::Approx(1.8).epsilon(1e-5));
        CHECK(traj.violation_count == 0);
    }
}

TEST_CASE("initial point outside the ellipsoid is rejected")
{
    const SynthesisArtifacts art = make({2}, 1.0);
    Vector x(2);
    x << 1.0, 1.0;
    x = point_at_level(art, x, 1.5);
    CHECK_THROWS_WITH_AS(simulate(art, PerturbationSpec::zero(art.blocks(), MaskKind::General), x,
                                  SimulationMode::Algebraic, {}),
                         doctest::Contains("outside solvability ellipsoid"), DomainError);
    CHECK_THROWS_AS(simulate(art, PerturbationSpec::zero(art.blocks(), MaskKind::General),
                             Vector::Zero(3), SimulationMode::Algebraic, {}),
                    DomainError);
}

TEST_CASE("the origin is already reached")
{
    const SynthesisArtifacts art = make({2});
    const Trajectory traj = simulate(art, PerturbationSpec::zero(art.blocks(), MaskKind::General),
                                     Vector::Zero(2), SimulationMode::Algebraic, {});
    CHECK(traj.complete());
    CHECK(traj.settling_time == 0.0);
    CHECK(traj.samples.size() == 1);
}

TEST_CASE("runs are deterministic")
{
    const SynthesisArtifacts art = make({2, 1}, 1.0, 0.5);
    const PerturbationSpec p = random_perturbation(art.blocks(), MaskKind::Superdiagonal, 0.05, 3);
    Vector x(3);
    x << 0.01, -0.02, 0.1;
    x = point_at_level(art, x, 0.9);
    const Trajectory a = simulate(art, p, x, SimulationMode::Algebraic, {});
    const Trajectory b = simulate(art, p, x, SimulationMode::Algebraic, {});
    REQUIRE(a.samples.size() == b.samples.size());
    for (std::size_t i = 0; i < a.samples.size(); ++i)
    {
        CHECK(a.samples[i].t == b.samples[i].t);
        CHECK(a.samples[i].x == b.samples[i].x);
    }
    CHECK(a.settling_time == b.settling_time);
}

TEST_CASE("bound violations are logged, not clipped")
{
    const SynthesisArtifacts art = make({2}, 1.0, 0.5);
    const PerturbationSpec p =
        builtin_perturbation(art.blocks(), MaskKind::Superdiagonal, 0.1, {{0, 1, Family::Constant, 0.1}});
    Vector x(2);
    x << 0.05, 0.05;
    x = point_at_level(art, x, 0.5);
    const Trajectory traj = simulate(art, p, x, SimulationMode::Algebraic, {}, 0.05);
    CHECK(traj.delta_limit == 0.05);
    CHECK(traj.violation_count > 0);
    REQUIRE_FALSE(traj.violations.empty());
    CHECK(traj.violations.front().row == 0);
    CHECK(traj.violations.front().col == 1);
    CHECK(traj.violations.front().value == doctest::Approx(0.1));
    CHECK(traj.violations.size() <= 256);
    // Within the declared bound nothing is logged.
    CHECK(simulate(art, p, x, SimulationMode::Algebraic, {}).violation_count == 0);
}

TEST_CASE("time limit and leaving the domain are reported")
{
    const SynthesisArtifacts art = make({2}, 1.0, 0.5);
    Vector x(2);
    x << 0.05, 0.05;
    x = point_at_level(art, x, 0.9);
    IntegratorConfig short_run;
    short_run.t_max = 0.1;
    const Trajectory cut = simulate(art, PerturbationSpec::zero(art.blocks(), MaskKind::General), x,
                                    SimulationMode::Algebraic, short_run);
    CHECK(cut.terminal == Terminal::TMaxExceeded);
    CHECK(std::isnan(cut.settling_time));

    // A strong destabilizing perturbation far above any margin.
    const PerturbationSpec strong = builtin_perturbation(art.blocks(), MaskKind::General, 50.0,
                                                         {{1, 1, Family::Constant, 50.0}});
    const Trajectory out = simulate(art, strong, x, SimulationMode::Algebraic, {});
    CHECK(out.terminal == Terminal::LeftDomain);
    CHECK(out.samples.back().theta > art.c);
}

TEST_CASE("algebraic and augmented modes agree")
{
    const SynthesisArtifacts art = make({2, 2}, 1.0, 0.5);
    const PerturbationSpec p = random_perturbation(art.blocks(), MaskKind::Superdiagonal, 0.05, 9);
    Vector x(4);
    x << 0.1, -0.1, 0.05, 0.2;
    x = point_at_level(art, x, 0.95);
    IntegratorConfig cfg;
    cfg.rtol = 1e-11;
    cfg.atol = 1e-14;
    const Trajectory a = simulate(art, p, x, SimulationMode::Algebraic, cfg);
    const Trajectory b = simulate(art, p, x, SimulationMode::Augmented, cfg);
    REQUIRE(a.complete());
    REQUIRE(b.complete());
    CHECK(a.settling_time == doctest::Approx(b.settling_time).epsilon(1e-4));
    for (const auto& s : b.samples)
        CHECK(std::abs(s.theta - solve_theta(art, s.x)) <= 1e-6);
}

TEST_CASE("rk4 and rk45 agree on the settling time")
{
    const SynthesisArtifacts art = make({3}, 1.0, 0.5);
    const PerturbationSpec p = random_perturbation(art.blocks(), MaskKind::General, 0.002, 4);
    Vector x(3);
    x << 0.001, 0.01, -0.1;
    x = point_at_level(art, x, 0.8);
    IntegratorConfig rk4;
    rk4.method = IntegratorMethod::Rk4Fixed;
    rk4.max_step = 0.002;
    const Trajectory a = simulate(art, p, x, SimulationMode::Algebraic, {});
    const Trajectory b = simulate(art, p, x, SimulationMode::Algebraic, rk4);
    REQUIRE(a.complete());
    REQUIRE(b.complete());
    CHECK(a.settling_time == doctest::Approx(b.settling_time).epsilon(1e-4));
}

TEST_CASE("summary statistics")
{
    const SynthesisArtifacts art = make({2}, 1.0, 0.25);
    Vector x(2);
    x << 0.05, 0.05;
    x = point_at_level(art, x, 0.5);
    const Trajectory traj = simulate(art, PerturbationSpec::zero(art.blocks(), MaskKind::General), x,
                                     SimulationMode::Algebraic, {});
    const TrajectorySummary s = summarize(traj, 0.25);
    CHECK(s.time_bound == doctest::Approx(2.0));
    CHECK(s.max_u_norm > 0.0);
    CHECK(s.max_u_norm <= 1.0);
    CHECK(s.min_theta_dot == doctest::Approx(-1.0));
    CHECK(s.terminal == Terminal::ReachedOrigin);
}

TEST_CASE("sweep records failures per entry")
{
    const SynthesisArtifacts art = make({2}, 1.0, 0.5);
    Vector x(2);
    x << 0.05, 0.05;
    x = point_at_level(art, x, 0.7);
    const PerturbationSpec base =
        builtin_perturbation(art.blocks(), MaskKind::Superdiagonal, 0.2, {{0, 1, Family::Sinusoid, 0.2, 2.0}});
    const SweepResult r = sweep(
        art,
        [&](double s) {
            if (s < 0.0)
                throw DomainError("negative scale");
            return base.scaled(s);
        },
        x, {0.0, 0.5, 1.0, -1.0}, SimulationMode::Algebraic, {});
    REQUIRE(r.entries.size() == 4);
    CHECK(r.entries[0].parameter == 0.0);
    CHECK(r.entries[0].summary->settling_time == doctest::Approx(0.7).epsilon(1e-5));
    CHECK(r.entries[3].error == "negative scale");
    CHECK_FALSE(r.entries[3].summary.has_value());
    CHECK(r.min_settling_time <= r.max_settling_time);
}
