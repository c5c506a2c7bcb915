#pragma once

// Perturbation margins: the comparison matrix G~, its spectral radius,
// the admissible bound delta, the ellipsoid radius c, and the derivative
// of the controllability function along perturbed motion.

#include "cfsynth/model.hpp"
#include "cfsynth/synthesis.hpp"

#include <string>
#include <utility>

namespace cfs
{

/// G~ = |F1^{-1}| (F R~ + R~' F), R~ the support filled with ones.
Matrix build_gtilde(const Matrix& F, const Matrix& F1, const Mask& support);

struct SpectralRadius
{
    double value = 0.0;
    double power_iteration = -1.0; // < 0 when the cross-check did not apply
    int power_iterations = 0;
};

/// max |lambda| by a dense nonsymmetric eigensolver. For entrywise
/// nonnegative input the Perron root is cross-checked by power iteration
/// to 1e-8 relative; when that has not converged (defective Perron root)
/// the eigenvalue must lie inside the Collatz-Wielandt bracket of the last
/// iterate instead. A failed check throws NumericalError.
SpectralRadius spectral_radius_detailed(const Matrix& M);
double spectral_radius(const Matrix& M);

enum class MarginMode
{
    SuperdiagonalGlobal,
    GeneralLocal
};

std::string to_string(MarginMode mode);

/// (1 - gamma) / rho, or (1 - gamma) / (max{c^{n1}, c} rho) in the general
/// case. rho == 0 gives +infinity.
double delta_margin(double gamma, double rho, MarginMode mode, double c, int n1);

/// Largest c with max{c^{n1}, c} <= (1 - gamma) / (delta rho).
double domain_radius(double gamma, double delta, double rho, int n1);

struct RobustnessBound
{
    Matrix gtilde;
    double rho_gtilde = 0.0;
    double delta = 0.0;
    MarginMode mode = MarginMode::SuperdiagonalGlobal;
    double c = 0.0;
};

MarginMode margin_mode(MaskKind kind);

/// Margin for the given support; the general case uses art.c.
RobustnessBound robustness_bound(const SynthesisArtifacts& art, const Mask& support,
                                 MaskKind kind);

/// S(theta) = theta (F D R D^{-1} + D^{-1} R' D F), D given by its diagonal.
Matrix s_matrix(const Matrix& F, const Vector& d, const Matrix& R, double theta);

/// -1 + (S y, y) / (F1 y, y). Throws DomainError for y == 0.
double theta_dot(const Matrix& F1, const Matrix& S, const Vector& y);

/// Extreme eigenvalues of S v = lambda F1 v (F1 positive definite).
std::pair<double, double> generalized_eigen_range(const Matrix& S, const Matrix& F1);

/// Instantaneous derivative of theta along x' = (A0 + K + R) x + B0 u(x).
double theta_dot_at(const SynthesisArtifacts& art, const Matrix& R, const Vector& x,
                    double theta);

} // namespace cfs
