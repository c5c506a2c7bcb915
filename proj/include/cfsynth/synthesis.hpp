#pragma once

// Controllability-function synthesis for canonical systems: the Gramian
// F^{-1}, its inverse F, the scaling matrices H and D(theta), F1, the
// admissible a0, the controllability function theta(x) and the bounded
// feedback u(x).

#include "cfsynth/model.hpp"
#include "cfsynth/rational.hpp"

#include <optional>

namespace cfs
{

/// Largest block size accepted by the Gramian construction.
inline constexpr int max_block_size = 12;

/// Exact block of F^{-1} for a chain of n integrators:
/// (-1)^{m+j} / ((n-m)! (n-j)! (2n-m-j+1) (2n-m-j+2)), m, j = 1..n.
RationalMatrix gram_inverse_block(int n);

/// Kernel matrix 1 / ((2n-m-j+1)(2n-m-j+2)); F^{-1} block is a signed
/// diagonal rescaling of it.
RationalMatrix gram_kernel_block(int n);

/// Block-diagonal F^{-1} in floating point (from the exact entries).
Matrix gram_inverse(const BlockStructure& blocks);

/// Exact inverse of one Gramian block, converted to double.
Matrix invert_gramian(const RationalMatrix& block);

/// F = (F^{-1})^{-1}, assembled block by block through the exact path.
/// Throws NumericalError if a block is singular or has a non-positive entry.
Matrix invert_gramian(const BlockStructure& blocks);

/// H = diag(-(2 n_i - 2 j + 1) / 2).
Matrix build_H(const BlockStructure& blocks);

/// Diagonal of D(theta): theta^{H_jj}. Throws DomainError for theta <= 0.
Vector build_D(const BlockStructure& blocks, double theta);

/// F1 = F - F H - H F. Cross-checked against the entrywise form
/// (2 n_i - m - j + 2) f_mj and required positive definite.
Matrix build_F1(const Matrix& F, const Matrix& H, const BlockStructure& blocks);

/// Right-hand side of the a0 admissibility bound,
/// 2 / (|F^{-1}| (|B0' F| + 2 max{c^{n1}, c} |B0' K|)^2),
/// all norms spectral.
double a0_max(const Matrix& F, const Matrix& Finv, const Matrix& K, const Matrix& B0,
              const BlockStructure& blocks, double c);

struct SynthesisOptions
{
    double c = 1.0;                 // ellipsoid level; +inf means global
    double gamma = 0.5;             // required decay rate, 0 < gamma < 1
    std::optional<double> a0;       // defaults to a0_max
};

struct SynthesisArtifacts
{
    CanonicalSystem system;
    Matrix Finv;
    Matrix F;
    Matrix H;
    Matrix F1;
    double a0 = 0.0;
    double a0_bound = 0.0;  // a0_max for this c; a0 <= a0_bound unless overridden
    double c = 1.0;
    double gamma = 0.5;

    const BlockStructure& blocks() const { return system.blocks; }
    int dim() const { return system.blocks.dim(); }
};

SynthesisArtifacts synthesize(const CanonicalSystem& system, const SynthesisOptions& options);

struct ThetaSolution
{
    double theta = 0.0;
    double residual = 0.0; // |g(theta)| / (2 a0 theta)
    int bisections = 0;
    int newton_steps = 0;
};

/// Unique positive root of 2 a0 theta = (D(theta) F D(theta) x, x);
/// theta(0) = 0. Throws NumericalError if no bracket exists in
/// [1e-30, 1e30].
ThetaSolution solve_theta_detailed(const SynthesisArtifacts& art, const Vector& x);
double solve_theta(const SynthesisArtifacts& art, const Vector& x);

/// Same root, started from a nearby estimate (e.g. the previous step of a
/// trajectory): safeguarded Newton inside an expanding bracket around
/// `hint`. Falls back to solve_theta_detailed when hint <= 0.
ThetaSolution solve_theta_near(const SynthesisArtifacts& art, const Vector& x, double hint);

/// u(x) = -(1/2 B0' D F D + B0' K) x with theta = theta(x); u(0) = 0.
Vector control(const SynthesisArtifacts& art, const Vector& x);

/// Same law evaluated at a supplied theta (augmented simulation).
Vector control_at(const SynthesisArtifacts& art, const Vector& x, double theta);

} // namespace cfs
