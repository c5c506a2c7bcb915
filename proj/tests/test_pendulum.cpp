#include "cfsynth/pendulum.hpp"
#include "cfsynth/robustness.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace cfs;
using namespace cfs::pendulum;

TEST_CASE("case 1 matrices")
{
    const Case1Params p;
    const PendulumCase pc = build_case1(p, 2.0);
    CHECK(pc.system.K(1, 0) == doctest::Approx(-9.8 / 60.0));
    CHECK(pc.system.K(3, 2) == doctest::Approx(-9.8 / 30.0));
    CHECK(pc.system.K.cwiseAbs().sum() == doctest::Approx(9.8 / 60.0 + 9.8 / 30.0));
    // h^2/(m1 l1^2) = 1/64, h^2/(m2 l2^2) = 1/32.
    CHECK(pc.r21 == doctest::Approx(2.0 / 64.0));
    CHECK(pc.r41 == doctest::Approx(2.0 / 32.0));
    const Matrix R = pc.perturbation.evaluate(0.0, default_initial_state());
    CHECK(R(1, 0) == doctest::Approx(-pc.r21));
    CHECK(R(1, 2) == doctest::Approx(pc.r21));
    CHECK(R(3, 0) == doctest::Approx(pc.r41));
    CHECK(R(3, 2) == doctest::Approx(-pc.r41));
    CHECK(pc.perturbation.bound() == doctest::Approx(4.0 / 32.0));
    CHECK(pc.perturbation.kind() == MaskKind::General);
    CHECK(build_case1(p, 0.0).perturbation.evaluate(0.0, default_initial_state()).norm() == 0.0);
}

TEST_CASE("case 2 matrices")
{
    const Case2Params p;
    const PendulumCase pc = build_case2(p, 60.0);
    CHECK(pc.system.K(1, 0) == doctest::Approx(-1.0 / 16.0));
    CHECK(pc.system.K(1, 2) == doctest::Approx(1.0 / 16.0));
    CHECK(pc.system.K(3, 0) == doctest::Approx(1.0 / 32.0));
    CHECK(pc.system.K(3, 2) == doctest::Approx(-1.0 / 32.0));
    const Matrix R = pc.perturbation.evaluate(0.0, default_initial_state());
    CHECK(R(1, 0) == doctest::Approx(-9.8 / 60.0));
    CHECK(R(3, 2) == doctest::Approx(-9.8 / 60.0));
    CHECK(pc.perturbation.bound() == doctest::Approx(9.8 / 30.0));
}

TEST_CASE("parameters are validated")
{
    Case1Params p1;
    p1.h = 100.0;
    CHECK_THROWS_AS(build_case1(p1, 1.0), DomainError);
    CHECK_THROWS_AS(build_case1(Case1Params{}, -1.0), DomainError);
    Case2Params p2;
    p2.gamma = 1.0;
    CHECK_THROWS_AS(build_case2(p2, 40.0), DomainError);
    CHECK_THROWS_AS(build_case2(Case2Params{}, 0.0), DomainError);
    CHECK_THROWS_AS(solvability_radius_case2(-1.0, 0.1, 9.8), DomainError);
}

TEST_CASE("both cases are controllable")
{
    for (double k : {0.0, 1.0, 4.0})
        CHECK(controllability_rank(build_case1(Case1Params{}, k)) == 4);
    for (double l : {30.0, 100.0, 1000.0})
        CHECK(controllability_rank(build_case2(Case2Params{}, l)) == 4);
}

TEST_CASE("case 1 lambda_max closed form")
{
    const BlockStructure b({2, 2});
    const SynthesisArtifacts art = synthesize(CanonicalSystem::make(b), {1.0, 0.5, std::nullopt});
    std::mt19937_64 rng(83);
    std::uniform_real_distribution<double> ur(0.0, 0.2), ut(0.05, 5.0);
    for (int trial = 0; trial < 100; ++trial)
    {
        const double r21 = ur(rng), r41 = ur(rng), th = ut(rng);
        Matrix R = Matrix::Zero(4, 4);
        R(1, 0) = -r21;
        R(1, 2) = r21;
        R(3, 0) = r41;
        R(3, 2) = -r41;
        const Matrix S = s_matrix(art.F, build_D(b, th), R, th);
        const double closed = case1_lambda_max(r21, r41, th);
        CHECK(generalized_eigen_range(S, art.F1).second ==
              doctest::Approx(closed).epsilon(1e-8).scale(1e-12));
    }
}

TEST_CASE("case 2 lambda_max = g theta^2 / (2 l)")
{
    const Case2Params p;
    std::mt19937_64 rng(89);
    std::uniform_real_distribution<double> ul(30.0, 500.0), ut(0.05, 5.0);
    const PendulumCase ref = build_case2(p, 30.0);
    const SynthesisArtifacts art = synthesize(ref.system, {2.0, p.gamma, std::nullopt});
    for (int trial = 0; trial < 100; ++trial)
    {
        const double l = ul(rng), th = ut(rng);
        const Matrix R = build_case2(p, l).perturbation.evaluate(0.0, default_initial_state());
        const Matrix S = s_matrix(art.F, build_D(art.blocks(), th), R, th);
        CHECK(generalized_eigen_range(S, art.F1).second ==
              doctest::Approx(p.g * th * th / (2.0 * l)).epsilon(1e-8));
    }
}

TEST_CASE("solvability radii")
{
    const Case1Params p1;
    const double c1 = solvability_radius_case1(p1, p1.k_max, p1.gamma);
    // 6 (1 - gamma) / (k (3/64 + sqrt(10)/32)).
    CHECK(c1 * c1 == doctest::Approx(6.0 * 0.999 / (4.0 * (3.0 / 64.0 + std::sqrt(10.0) / 32.0))));
    CHECK(c1 == doctest::Approx(3.2).epsilon(0.05 / 3.2));
    // At the radius the worst perturbation exhausts the decay margin.
    const PendulumCase worst = build_case1(p1, p1.k_max);
    CHECK(case1_lambda_max(worst.r21, worst.r41, c1) == doctest::Approx(1.0 - p1.gamma));
    // Softer springs allow a larger ellipsoid.
    CHECK(solvability_radius_case1(p1, 2.0, p1.gamma) > c1);

    const double c2 = solvability_radius_case2(30.0, 0.001, 9.8);
    CHECK(c2 == doctest::Approx(std::sqrt(60.0 * 0.999 / 9.8)));
    CHECK(c2 == doctest::Approx(2.47).epsilon(0.01 / 2.47));
    CHECK(solvability_radius_case2(60.0, 0.001, 9.8) > c2);
}

TEST_CASE("reference initial point")
{
    const Vector x0 = default_initial_state();
    CHECK(x0.size() == 4);
    CHECK(x0(0) == -0.3);
    CHECK(x0(1) == 0.3);
}
