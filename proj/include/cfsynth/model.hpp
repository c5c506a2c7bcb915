#pragma once

// Canonical (chain-of-integrators) systems with structured, bounded,
// unknown perturbations:
//
//   x' = (A0 + K + R(t,x)) x + B0 u,   |r_mj(t,x)| <= delta.

#include <Eigen/Dense>

#include <functional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cfs
{

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Mask = Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// Raised when an input violates a documented precondition.
class DomainError : public std::domain_error
{
public:
    using std::domain_error::domain_error;
};

/// Raised when a numerical construction breaks (singular block, no bracket,
/// non-convergence). These indicate a bug or an out-of-range request.
class NumericalError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Partition n1 >= n2 >= ... >= nr >= 1 of the state dimension.
///
/// Indices are zero-based throughout the library: block i covers rows
/// offset(i) .. offset(i)+size(i)-1 and its control row is control_row(i).
class BlockStructure
{
public:
    explicit BlockStructure(std::vector<int> sizes);

    int dim() const { return dim_; }
    int count() const { return static_cast<int>(sizes_.size()); }
    int size(int i) const { return sizes_[i]; }
    int largest() const { return sizes_.front(); }
    int offset(int i) const { return offsets_[i]; }
    int control_row(int i) const { return offsets_[i] + sizes_[i] - 1; }
    std::span<const int> sizes() const { return sizes_; }

    /// Block containing state index `row`.
    int block_of(int row) const { return block_of_[row]; }
    /// One-based position j of `row` inside its block.
    int position(int row) const { return row - offsets_[block_of_[row]] + 1; }
    bool is_control_row(int row) const;

    bool operator==(const BlockStructure&) const = default;

private:
    std::vector<int> sizes_;
    std::vector<int> offsets_;
    std::vector<int> block_of_;
    int dim_ = 0;
};

Matrix build_A0(const BlockStructure& blocks);
Matrix build_B0(const BlockStructure& blocks);

/// Linear part of the nominal system. K may be nonzero only in control rows.
struct CanonicalSystem
{
    BlockStructure blocks;
    Matrix A0;
    Matrix B0;
    Matrix K;

    /// Throws DomainError if K has the wrong shape or nonzeros outside
    /// the control rows.
    static CanonicalSystem make(BlockStructure blocks, Matrix K);
    static CanonicalSystem make(BlockStructure blocks);
};

enum class MaskKind
{
    Superdiagonal, // r_{m,m+1} inside each block only
    General        // block-local lower Hessenberg plus full control rows
};

std::string to_string(MaskKind kind);
MaskKind mask_kind_from_string(const std::string& name);

Mask build_perturbation_mask(const BlockStructure& blocks, MaskKind kind);

/// Fills R (already sized n x n and zeroed) for the given time and state.
using Realization = std::function<void(double t, const Vector& x, Matrix& R)>;

enum class Family
{
    Constant,       // r = amplitude
    Sinusoid,       // r = amplitude * sin(omega t + phase)
    SaturatingState // r = amplitude * 2 x_k / (1 + x_k^2)
};

std::string to_string(Family family);
Family family_from_string(const std::string& name);

/// One perturbed entry of a built-in realization. |amplitude| <= delta is
/// enforced at construction; every family shape lies in [-1, 1].
struct PerturbationTerm
{
    int row = 0;
    int col = 0;
    Family family = Family::Constant;
    double amplitude = 0.0;
    double omega = 1.0;
    double phase = 0.0;
    int state = 0; // SaturatingState only
};

/// Structured perturbation R(t,x): structure kind, the support actually
/// perturbed (subset of the structural mask), declared bound and realization.
class PerturbationSpec
{
public:
    PerturbationSpec(const BlockStructure& blocks, MaskKind kind, Mask support,
                     double bound, Realization realization);

    /// No perturbation at all (R == 0, bound 0).
    static PerturbationSpec zero(const BlockStructure& blocks, MaskKind kind);

    MaskKind kind() const { return kind_; }
    const Mask& support() const { return support_; }
    double bound() const { return bound_; }
    int dim() const { return static_cast<int>(support_.rows()); }
    bool empty() const { return !support_.any(); }

    Matrix evaluate(double t, const Vector& x) const;
    void evaluate(double t, const Vector& x, Matrix& R) const;

    /// Same structure and bound, realization multiplied by `factor`.
    PerturbationSpec scaled(double factor) const;
    /// Same realization, declared bound replaced.
    PerturbationSpec with_bound(double bound) const;

private:
    MaskKind kind_;
    Mask support_;
    double bound_;
    Realization realization_;
};

/// Built-in smooth families. Throws DomainError for delta < 0, an entry
/// outside the structural mask, |amplitude| > delta, or a bad state index.
PerturbationSpec builtin_perturbation(const BlockStructure& blocks, MaskKind kind,
                                      double delta, std::vector<PerturbationTerm> terms);

/// Same family for every term; amplitudes taken from `terms`.
PerturbationSpec builtin_perturbation(const BlockStructure& blocks, MaskKind kind,
                                      Family family, double delta,
                                      std::vector<PerturbationTerm> terms);

/// Deterministic pseudo-random admissible perturbation over the full
/// structural mask: every allowed entry gets a random family and an
/// amplitude in [-delta, delta]. Same seed, same realization.
PerturbationSpec random_perturbation(const BlockStructure& blocks, MaskKind kind,
                                     double delta, unsigned long long seed);

} // namespace cfs
