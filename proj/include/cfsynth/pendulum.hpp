#pragma once

// Two pendulums coupled by a spring, linearized about the lower
// equilibrium, with state (phi1, phi1', phi2, phi2') and torque inputs.
//
// Case 1: spring stiffness unknown (k <= k_max).
// Case 2: common pendulum length unknown (l >= l_min), h / l known.

#include "cfsynth/model.hpp"
#include "cfsynth/synthesis.hpp"

namespace cfs::pendulum
{

inline constexpr double default_gravity = 9.8;

struct Case1Params
{
    double m1 = 1.0;
    double m2 = 2.0;
    double l1 = 60.0;
    double l2 = 30.0;
    double h = 7.5;
    double k_max = 4.0; // stiffness bound; the realized k is a run parameter
    double g = default_gravity;
    double gamma = 0.001;

    void validate() const;
};

struct Case2Params
{
    double m1 = 1.0;
    double m2 = 2.0;
    double k = 1.0;
    double h_over_l = 0.25;
    double l_min = 30.0; // length bound; the realized l is a run parameter
    double g = default_gravity;
    double gamma = 0.001;

    void validate() const;
};

struct PendulumCase
{
    CanonicalSystem system;
    PerturbationSpec perturbation;
    double k21 = 0.0;
    double k43 = 0.0; // case 1
    double k41 = 0.0; // case 2
    double r21 = 0.0;
    double r41 = 0.0; // case 1
};

/// blocks [2,2]; K = -g/l1 at (2,1), -g/l2 at (4,3); R at (2,1),(2,3),(4,1),(4,3)
/// with r21 = k h^2/(m1 l1^2), r41 = k h^2/(m2 l2^2). Declared bound is
/// k_max * max{h^2/(m1 l1^2), h^2/(m2 l2^2)}.
PendulumCase build_case1(const Case1Params& params, double stiffness);

/// blocks [2,2]; K carries the known spring coupling, R = -g/l at (2,1) and
/// (4,3). Declared bound g / l_min.
PendulumCase build_case2(const Case2Params& params, double length);

/// Largest c with lambda_max(F1^{-1} S(c)) <= 1 - gamma at k = k_max.
double solvability_radius_case1(const Case1Params& params, double k_max, double gamma);

/// c = sqrt(2 l_min (1 - gamma) / g).
double solvability_radius_case2(double l_min, double gamma, double g);

/// lambda_max(F1^{-1} S(theta)) for the case-1 perturbation in closed form,
/// (r21 + r41 + 2 sqrt(2 (r21^2 + r41^2))) theta^2 / 6.
double case1_lambda_max(double r21, double r41, double theta);

/// rank of (B0, (A0 + K + R) B0).
int controllability_rank(const PendulumCase& pc);

/// Reference initial point (-0.3, 0.3, 0, 0).
Vector default_initial_state();

} // namespace cfs::pendulum
