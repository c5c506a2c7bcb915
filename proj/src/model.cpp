#include "cfsynth/model.hpp"

#include <cmath>
#include <random>
#include <utility>

namespace cfs
{

BlockStructure::BlockStructure(std::vector<int> sizes) : sizes_(std::move(sizes))
{
    if (sizes_.empty())
        throw DomainError("block structure must contain at least one block");
    for (std::size_t i = 0; i < sizes_.size(); ++i)
    {
        if (sizes_[i] < 1)
            throw DomainError("block sizes must be positive");
        if (i > 0 && sizes_[i] > sizes_[i - 1])
            throw DomainError("block sizes must be non-increasing");
    }
    for (int s : sizes_)
    {
        offsets_.push_back(dim_);
        for (int j = 0; j < s; ++j)
            block_of_.push_back(static_cast<int>(offsets_.size()) - 1);
        dim_ += s;
    }
}

bool BlockStructure::is_control_row(int row) const
{
    return row == control_row(block_of(row));
}

Matrix build_A0(const BlockStructure& blocks)
{
    Matrix A = Matrix::Zero(blocks.dim(), blocks.dim());
    for (int i = 0; i < blocks.count(); ++i)
        for (int m = blocks.offset(i); m < blocks.control_row(i); ++m)
            A(m, m + 1) = 1.0;
    return A;
}

Matrix build_B0(const BlockStructure& blocks)
{
    Matrix B = Matrix::Zero(blocks.dim(), blocks.count());
    for (int i = 0; i < blocks.count(); ++i)
        B(blocks.control_row(i), i) = 1.0;
    return B;
}

CanonicalSystem CanonicalSystem::make(BlockStructure blocks, Matrix K)
{
    const int n = blocks.dim();
    if (K.rows() != n || K.cols() != n)
        throw DomainError("K must be " + std::to_string(n) + "x" + std::to_string(n));
    for (int m = 0; m < n; ++m)
    {
        if (blocks.is_control_row(m))
            continue;
        if (K.row(m).cwiseAbs().maxCoeff() != 0.0)
            throw DomainError("K has a nonzero entry in row " + std::to_string(m + 1) +
                              ", which is not a control row");
    }
    Matrix A0 = build_A0(blocks);
    Matrix B0 = build_B0(blocks);
    return CanonicalSystem{std::move(blocks), std::move(A0), std::move(B0), std::move(K)};
}

CanonicalSystem CanonicalSystem::make(BlockStructure blocks)
{
    const int n = blocks.dim();
    return make(std::move(blocks), Matrix::Zero(n, n));
}

std::string to_string(MaskKind kind)
{
    return kind == MaskKind::Superdiagonal ? "superdiagonal" : "general";
}

MaskKind mask_kind_from_string(const std::string& name)
{
    if (name == "superdiagonal")
        return MaskKind::Superdiagonal;
    if (name == "general")
        return MaskKind::General;
    throw DomainError("unknown mask kind '" + name + "'");
}

Mask build_perturbation_mask(const BlockStructure& blocks, MaskKind kind)
{
    const int n = blocks.dim();
    Mask mask = Mask::Constant(n, n, false);
    for (int i = 0; i < blocks.count(); ++i)
    {
        const int off = blocks.offset(i);
        const int ni = blocks.size(i);
        if (kind == MaskKind::Superdiagonal)
        {
            for (int p = 0; p + 1 < ni; ++p)
                mask(off + p, off + p + 1) = true;
            continue;
        }
        // Row p of the block may touch block columns 0..p+1.
        for (int p = 0; p < ni; ++p)
            for (int q = 0; q < ni && q <= p + 1; ++q)
                mask(off + p, off + q) = true;
        mask.row(blocks.control_row(i)).setConstant(true);
    }
    return mask;
}

std::string to_string(Family family)
{
    switch (family)
    {
    case Family::Constant:
        return "constant";
    case Family::Sinusoid:
        return "sinusoid";
    case Family::SaturatingState:
        return "saturating-state";
    }
    return "constant";
}

Family family_from_string(const std::string& name)
{
    if (name == "constant")
        return Family::Constant;
    if (name == "sinusoid")
        return Family::Sinusoid;
    if (name == "saturating-state")
        return Family::SaturatingState;
    throw DomainError("unknown perturbation family '" + name + "'");
}

PerturbationSpec::PerturbationSpec(const BlockStructure& blocks, MaskKind kind, Mask support,
                                   double bound, Realization realization)
    : kind_(kind), support_(std::move(support)), bound_(bound),
      realization_(std::move(realization))
{
    const int n = blocks.dim();
    if (support_.rows() != n || support_.cols() != n)
        throw DomainError("perturbation support has the wrong shape");
    if (!(bound_ >= 0.0))
        throw DomainError("perturbation bound must be nonnegative");
    const Mask allowed = build_perturbation_mask(blocks, kind);
    for (int m = 0; m < n; ++m)
        for (int j = 0; j < n; ++j)
            if (support_(m, j) && !allowed(m, j))
                throw DomainError("perturbation entry (" + std::to_string(m + 1) + "," +
                                  std::to_string(j + 1) + ") lies outside the " +
                                  to_string(kind) + " mask");
}

PerturbationSpec PerturbationSpec::zero(const BlockStructure& blocks, MaskKind kind)
{
    const int n = blocks.dim();
    return PerturbationSpec(blocks, kind, Mask::Constant(n, n, false), 0.0,
                            [](double, const Vector&, Matrix&) {});
}

void PerturbationSpec::evaluate(double t, const Vector& x, Matrix& R) const
{
    R.setZero(dim(), dim());
    realization_(t, x, R);
}

Matrix PerturbationSpec::evaluate(double t, const Vector& x) const
{
    Matrix R;
    evaluate(t, x, R);
    return R;
}

PerturbationSpec PerturbationSpec::scaled(double factor) const
{
    PerturbationSpec out = *this;
    out.realization_ = [inner = realization_, factor](double t, const Vector& x, Matrix& R) {
        inner(t, x, R);
        R *= factor;
    };
    return out;
}

PerturbationSpec PerturbationSpec::with_bound(double bound) const
{
    if (!(bound >= 0.0))
        throw DomainError("perturbation bound must be nonnegative");
    PerturbationSpec out = *this;
    out.bound_ = bound;
    return out;
}

PerturbationSpec builtin_perturbation(const BlockStructure& blocks, MaskKind kind, double delta,
                                      std::vector<PerturbationTerm> terms)
{
    if (!(delta >= 0.0))
        throw DomainError("delta must be nonnegative");
    const int n = blocks.dim();
    Mask support = Mask::Constant(n, n, false);
    for (const auto& term : terms)
    {
        if (term.row < 0 || term.row >= n || term.col < 0 || term.col >= n)
            throw DomainError("perturbation entry index out of range");
        if (std::abs(term.amplitude) > delta)
            throw DomainError("perturbation amplitude " + std::to_string(term.amplitude) +
                              " exceeds delta " + std::to_string(delta));
        if (term.family == Family::SaturatingState && (term.state < 0 || term.state >= n))
            throw DomainError("saturating-state term references a missing state");
        support(term.row, term.col) = true;
    }
    auto realization = [terms = std::move(terms)](double t, const Vector& x, Matrix& R) {
        for (const auto& term : terms)
        {
            double shape = 1.0;
            switch (term.family)
            {
            case Family::Constant:
                break;
            case Family::Sinusoid:
                shape = std::sin(term.omega * t + term.phase);
                break;
            case Family::SaturatingState: {
                const double xs = x[term.state];
                shape = 2.0 * xs / (1.0 + xs * xs);
                break;
            }
            }
            R(term.row, term.col) += term.amplitude * shape;
        }
    };
    return PerturbationSpec(blocks, kind, std::move(support), delta, std::move(realization));
}

PerturbationSpec builtin_perturbation(const BlockStructure& blocks, MaskKind kind, Family family,
                                      double delta, std::vector<PerturbationTerm> terms)
{
    for (auto& term : terms)
        term.family = family;
    return builtin_perturbation(blocks, kind, delta, std::move(terms));
}

PerturbationSpec random_perturbation(const BlockStructure& blocks, MaskKind kind, double delta,
                                     unsigned long long seed)
{
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const Mask mask = build_perturbation_mask(blocks, kind);
    std::vector<PerturbationTerm> terms;
    for (int m = 0; m < mask.rows(); ++m)
    {
        for (int j = 0; j < mask.cols(); ++j)
        {
            if (!mask(m, j))
                continue;
            PerturbationTerm term;
            term.row = m;
            term.col = j;
            term.family = static_cast<Family>(static_cast<int>(unit(rng) * 3.0) % 3);
            // Half of the entries sit on the bound, where the margin is tight.
            const double magnitude = unit(rng) < 0.5 ? 1.0 : unit(rng);
            term.amplitude = (unit(rng) < 0.5 ? -1.0 : 1.0) * magnitude * delta;
            term.omega = 0.5 + 4.5 * unit(rng);
            term.phase = 2.0 * 3.141592653589793 * unit(rng);
            term.state = static_cast<int>(unit(rng) * mask.rows()) % static_cast<int>(mask.rows());
            terms.push_back(term);
        }
    }
    return builtin_perturbation(blocks, kind, delta, std::move(terms));
}

} // namespace cfs
