#include "cfsynth/pendulum.hpp"

#include <algorithm>
#include <cmath>

namespace cfs::pendulum
{
namespace
{

void require_positive(double value, const char* name)
{
    if (!(value > 0.0))
        throw DomainError(std::string(name) + " must be positive");
}

void require_gamma(double gamma)
{
    if (!(gamma > 0.0 && gamma < 1.0))
        throw DomainError("gamma must lie in (0, 1)");
}

const BlockStructure& two_by_two()
{
    static const BlockStructure blocks({2, 2});
    return blocks;
}

} // namespace

void Case1Params::validate() const
{
    require_positive(m1, "m1");
    require_positive(m2, "m2");
    require_positive(l1, "l1");
    require_positive(l2, "l2");
    require_positive(h, "h");
    require_positive(k_max, "k_max");
    require_positive(g, "g");
    require_gamma(gamma);
    if (h > std::min(l1, l2))
        throw DomainError("spring attachment h exceeds a pendulum length");
}

void Case2Params::validate() const
{
    require_positive(m1, "m1");
    require_positive(m2, "m2");
    require_positive(k, "k");
    require_positive(h_over_l, "h/l");
    require_positive(l_min, "l_min");
    require_positive(g, "g");
    require_gamma(gamma);
    if (h_over_l > 1.0)
        throw DomainError("spring attachment h exceeds the pendulum length");
}

PendulumCase build_case1(const Case1Params& params, double stiffness)
{
    params.validate();
    if (!(stiffness >= 0.0))
        throw DomainError("stiffness must be nonnegative");
    const BlockStructure& blocks = two_by_two();
    const double w1 = params.h * params.h / (params.m1 * params.l1 * params.l1);
    const double w2 = params.h * params.h / (params.m2 * params.l2 * params.l2);

    PendulumCase out{CanonicalSystem::make(blocks), PerturbationSpec::zero(blocks, MaskKind::General)};
    out.k21 = params.g / params.l1;
    out.k43 = params.g / params.l2;
    out.r21 = stiffness * w1;
    out.r41 = stiffness * w2;

    Matrix K = Matrix::Zero(4, 4);
    K(1, 0) = -out.k21;
    K(3, 2) = -out.k43;
    out.system = CanonicalSystem::make(blocks, K);

    const double bound = params.k_max * std::max(w1, w2);
    out.perturbation = builtin_perturbation(blocks, MaskKind::General, Family::Constant,
                                            std::max(bound, std::max(out.r21, out.r41)),
                                            {{1, 0, Family::Constant, -out.r21},
                                             {1, 2, Family::Constant, out.r21},
                                             {3, 0, Family::Constant, out.r41},
                                             {3, 2, Family::Constant, -out.r41}})
                           .with_bound(bound);
    return out;
}

PendulumCase build_case2(const Case2Params& params, double length)
{
    params.validate();
    require_positive(length, "length");
    const BlockStructure& blocks = two_by_two();
    const double ratio2 = params.h_over_l * params.h_over_l;

    PendulumCase out{CanonicalSystem::make(blocks), PerturbationSpec::zero(blocks, MaskKind::General)};
    out.k21 = params.k * ratio2 / params.m1;
    out.k41 = params.k * ratio2 / params.m2;
    out.r21 = params.g / length;

    Matrix K = Matrix::Zero(4, 4);
    K(1, 0) = -out.k21;
    K(1, 2) = out.k21;
    K(3, 0) = out.k41;
    K(3, 2) = -out.k41;
    out.system = CanonicalSystem::make(blocks, K);

    const double bound = params.g / params.l_min;
    out.perturbation = builtin_perturbation(blocks, MaskKind::General, Family::Constant,
                                            std::max(bound, out.r21),
                                            {{1, 0, Family::Constant, -out.r21},
                                             {3, 2, Family::Constant, -out.r21}})
                           .with_bound(bound);
    return out;
}

double case1_lambda_max(double r21, double r41, double theta)
{
    return (r21 + r41 + 2.0 * std::sqrt(2.0 * (r21 * r21 + r41 * r41))) * theta * theta / 6.0;
}

double solvability_radius_case1(const Case1Params& params, double k_max, double gamma)
{
    params.validate();
    require_positive(k_max, "k_max");
    require_gamma(gamma);
    const double w1 = params.h * params.h / (params.m1 * params.l1 * params.l1);
    const double w2 = params.h * params.h / (params.m2 * params.l2 * params.l2);
    const double spread = w1 + w2 + 2.0 * std::sqrt(2.0 * w1 * w1 + 2.0 * w2 * w2);
    return std::sqrt(6.0 * (1.0 - gamma) / (k_max * spread));
}

double solvability_radius_case2(double l_min, double gamma, double g)
{
    require_positive(l_min, "l_min");
    require_positive(g, "g");
    require_gamma(gamma);
    return std::sqrt(2.0 * l_min * (1.0 - gamma) / g);
}

int controllability_rank(const PendulumCase& pc)
{
    const Matrix R = pc.perturbation.evaluate(0.0, Vector::Zero(4));
    const Matrix& B0 = pc.system.B0;
    Matrix ctrb(4, 4);
    ctrb << B0, (pc.system.A0 + pc.system.K + R) * B0;
    return static_cast<int>(Eigen::FullPivLU<Matrix>(ctrb).rank());
}

Vector default_initial_state()
{
    Vector x0(4);
    x0 << -0.3, 0.3, 0.0, 0.0;
    return x0;
}

} // namespace cfs::pendulum
