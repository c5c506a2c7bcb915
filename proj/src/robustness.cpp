#include "cfsynth/robustness.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace cfs
{

Matrix build_gtilde(const Matrix& F, const Matrix& F1, const Mask& support)
{
    const Matrix ones = support.cast<double>();
    return F1.inverse().cwiseAbs() * (F * ones + ones.transpose() * F);
}

SpectralRadius spectral_radius_detailed(const Matrix& M)
{
    if (M.rows() != M.cols())
        throw DomainError("spectral radius of a non-square matrix");
    if (!M.allFinite())
        throw DomainError("spectral radius of a matrix with non-finite entries");

    SpectralRadius out;
    if (M.size() == 0)
        return out;

    Eigen::EigenSolver<Matrix> solver(M, false);
    if (solver.info() != Eigen::Success)
        throw NumericalError("eigenvalue iteration did not converge");
    out.value = solver.eigenvalues().cwiseAbs().maxCoeff();

    if ((M.array() < 0.0).any() || out.value == 0.0)
        return out;

    // Perron root of a nonnegative matrix. A positive shift removes the
    // cyclic peripheral spectrum without moving the Perron vector.
    const Eigen::Index n = M.rows();
    const double shift = M.cwiseAbs().maxCoeff();
    const Matrix shifted = M + shift * Matrix::Identity(n, n);
    Vector v = Vector::Ones(n) / std::sqrt(static_cast<double>(n));
    double estimate = 0.0;
    constexpr int max_iterations = 20000;
    for (int it = 1; it <= max_iterations; ++it)
    {
        Vector w = shifted * v;
        const double norm = w.norm();
        if (norm == 0.0)
            break;
        w /= norm;
        const double next = w.dot(shifted * w) - shift;
        const double change = (w - v).norm();
        v = std::move(w);
        estimate = next;
        out.power_iterations = it;
        if (change < 1e-13)
            break;
    }
    out.power_iteration = estimate;
    if (std::abs(out.power_iteration - out.value) <= 1e-8 * out.value)
        return out;

    // A defective Perron root makes power iteration converge like 1/k.
    // Fall back to the Collatz-Wielandt bracket
    //   min_i (Mv)_i / v_i <= rho <= max_i (Mv)_i / v_i,  v > 0,
    // which holds for any positive v.
    const Vector pos = v.cwiseAbs().array() + 1e-12 * v.cwiseAbs().maxCoeff();
    const Vector ratio = (M * pos).cwiseQuotient(pos);
    const double lower = ratio.minCoeff();
    const double upper = ratio.maxCoeff();
    const double slack = 1e-8 * out.value;
    if (out.value < lower - slack || out.value > upper + slack)
        throw NumericalError("power iteration disagrees with the eigensolver: " +
                             std::to_string(out.power_iteration) + " vs " +
                             std::to_string(out.value) + " after " +
                             std::to_string(out.power_iterations) +
                             " iterations; Collatz-Wielandt bracket [" + std::to_string(lower) +
                             ", " + std::to_string(upper) + "]");
    return out;
}

double spectral_radius(const Matrix& M)
{
    return spectral_radius_detailed(M).value;
}

std::string to_string(MarginMode mode)
{
    return mode == MarginMode::SuperdiagonalGlobal ? "superdiagonal-global" : "general-local";
}

double delta_margin(double gamma, double rho, MarginMode mode, double c, int n1)
{
    if (!(gamma > 0.0 && gamma < 1.0))
        throw DomainError("gamma must lie in (0, 1)");
    if (!(rho >= 0.0))
        throw DomainError("rho must be nonnegative");
    if (rho == 0.0)
        return std::numeric_limits<double>::infinity();
    if (mode == MarginMode::SuperdiagonalGlobal)
        return (1.0 - gamma) / rho;
    if (!(c > 0.0))
        throw DomainError("general-mode margin requires c > 0");
    return (1.0 - gamma) / (std::max(std::pow(c, n1), c) * rho);
}

double domain_radius(double gamma, double delta, double rho, int n1)
{
    if (!(delta * rho > 0.0))
        throw DomainError("domain radius requires delta * rho > 0");
    const double q = (1.0 - gamma) / (delta * rho);
    return q <= 1.0 ? q : std::pow(q, 1.0 / n1);
}

MarginMode margin_mode(MaskKind kind)
{
    return kind == MaskKind::Superdiagonal ? MarginMode::SuperdiagonalGlobal
                                           : MarginMode::GeneralLocal;
}

RobustnessBound robustness_bound(const SynthesisArtifacts& art, const Mask& support,
                                 MaskKind kind)
{
    RobustnessBound out;
    out.mode = margin_mode(kind);
    out.c = art.c;
    out.gtilde = build_gtilde(art.F, art.F1, support);
    out.rho_gtilde = spectral_radius(out.gtilde);
    out.delta = delta_margin(art.gamma, out.rho_gtilde, out.mode, art.c, art.blocks().largest());
    return out;
}

Matrix s_matrix(const Matrix& F, const Vector& d, const Matrix& R, double theta)
{
    if (!(theta > 0.0))
        throw DomainError("S(theta) requires theta > 0");
    // (D R D^{-1})_{mj} = d_m r_mj / d_j
    const Matrix conj = d.asDiagonal() * R * d.cwiseInverse().asDiagonal();
    const Matrix half = F * conj;
    return theta * (half + half.transpose());
}

double theta_dot(const Matrix& F1, const Matrix& S, const Vector& y)
{
    if (y.squaredNorm() == 0.0)
        throw DomainError("theta derivative is undefined at y = 0");
    return -1.0 + y.dot(S * y) / y.dot(F1 * y);
}

std::pair<double, double> generalized_eigen_range(const Matrix& S, const Matrix& F1)
{
    Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> solver(0.5 * (S + S.transpose()),
                                                            0.5 * (F1 + F1.transpose()),
                                                            Eigen::EigenvaluesOnly);
    if (solver.info() != Eigen::Success)
        throw NumericalError("generalized eigenproblem failed");
    const Vector& ev = solver.eigenvalues();
    return {ev.minCoeff(), ev.maxCoeff()};
}

double theta_dot_at(const SynthesisArtifacts& art, const Matrix& R, const Vector& x, double theta)
{
    const Vector d = build_D(art.blocks(), theta);
    const Vector y = d.cwiseProduct(x);
    return theta_dot(art.F1, s_matrix(art.F, d, R, theta), y);
}

} // namespace cfs
