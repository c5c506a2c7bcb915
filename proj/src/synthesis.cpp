#include "cfsynth/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace cfs
{
namespace
{

using boost::multiprecision::cpp_int;

cpp_int factorial(int k)
{
    cpp_int out = 1;
    for (int i = 2; i <= k; ++i)
        out *= i;
    return out;
}

void check_block_size(int n)
{
    if (n < 1 || n > max_block_size)
        throw DomainError("block size " + std::to_string(n) + " is outside 1.." +
                          std::to_string(max_block_size));
}

double spectral_norm(const Matrix& M)
{
    if (M.size() == 0)
        return 0.0;
    Eigen::JacobiSVD<Matrix> svd(M);
    return svd.singularValues()(0);
}

} // namespace

RationalMatrix gram_inverse_block(int n)
{
    check_block_size(n);
    RationalMatrix out(n, n);
    for (int m = 1; m <= n; ++m)
        for (int j = 1; j <= n; ++j)
        {
            cpp_int den = factorial(n - m) * factorial(n - j) * (2 * n - m - j + 1) *
                          (2 * n - m - j + 2);
            Rational entry(cpp_int(1), den);
            out(m - 1, j - 1) = ((m + j) % 2 == 0) ? entry : Rational(-entry);
        }
    return out;
}

RationalMatrix gram_kernel_block(int n)
{
    check_block_size(n);
    RationalMatrix out(n, n);
    for (int m = 1; m <= n; ++m)
        for (int j = 1; j <= n; ++j)
            out(m - 1, j - 1) = Rational(cpp_int(1), cpp_int((2 * n - m - j + 1) * (2 * n - m - j + 2)));
    return out;
}

Matrix gram_inverse(const BlockStructure& blocks)
{
    Matrix out = Matrix::Zero(blocks.dim(), blocks.dim());
    for (int i = 0; i < blocks.count(); ++i)
    {
        const int off = blocks.offset(i);
        const int ni = blocks.size(i);
        out.block(off, off, ni, ni) = gram_inverse_block(ni).to_double();
    }
    return out;
}

Matrix invert_gramian(const RationalMatrix& block)
{
    const RationalMatrix inv = inverse(block);
    for (int m = 0; m < inv.rows(); ++m)
        for (int j = 0; j < inv.cols(); ++j)
            if (inv(m, j) <= 0)
                throw NumericalError("Gramian inverse has a non-positive entry at (" +
                                     std::to_string(m + 1) + "," + std::to_string(j + 1) + ")");
    return inv.to_double();
}

Matrix invert_gramian(const BlockStructure& blocks)
{
    Matrix out = Matrix::Zero(blocks.dim(), blocks.dim());
    for (int i = 0; i < blocks.count(); ++i)
    {
        const int off = blocks.offset(i);
        const int ni = blocks.size(i);
        out.block(off, off, ni, ni) = invert_gramian(gram_inverse_block(ni));
    }
    return out;
}

Matrix build_H(const BlockStructure& blocks)
{
    Matrix H = Matrix::Zero(blocks.dim(), blocks.dim());
    for (int m = 0; m < blocks.dim(); ++m)
    {
        const int ni = blocks.size(blocks.block_of(m));
        const int j = blocks.position(m);
        H(m, m) = -(2.0 * ni - 2.0 * j + 1.0) / 2.0;
    }
    return H;
}

Vector build_D(const BlockStructure& blocks, double theta)
{
    if (!(theta > 0.0))
        throw DomainError("D(theta) requires theta > 0");
    const Matrix H = build_H(blocks);
    Vector d(blocks.dim());
    for (int m = 0; m < blocks.dim(); ++m)
        d[m] = std::pow(theta, H(m, m));
    return d;
}

Matrix build_F1(const Matrix& F, const Matrix& H, const BlockStructure& blocks)
{
    Matrix F1 = F - F * H - H * F;
    for (int i = 0; i < blocks.count(); ++i)
    {
        const int off = blocks.offset(i);
        const int ni = blocks.size(i);
        for (int m = 1; m <= ni; ++m)
            for (int j = 1; j <= ni; ++j)
            {
                const double direct = (2.0 * ni - m - j + 2.0) * F(off + m - 1, off + j - 1);
                const double algebraic = F1(off + m - 1, off + j - 1);
                const double scale = std::max(std::abs(direct), 1.0);
                if (std::abs(direct - algebraic) > 1e-12 * scale)
                    throw NumericalError("F1 entrywise formula disagrees with F - FH - HF");
            }
    }
    Eigen::LLT<Matrix> llt(0.5 * (F1 + F1.transpose()));
    if (llt.info() != Eigen::Success)
        throw NumericalError("F1 is not positive definite");
    return F1;
}

double a0_max(const Matrix& F, const Matrix& Finv, const Matrix& K, const Matrix& B0,
              const BlockStructure& blocks, double c)
{
    if (!(c > 0.0))
        throw DomainError("a0_max requires c > 0");
    const double finv_norm = spectral_norm(Finv);
    const double bf_norm = spectral_norm(B0.transpose() * F);
    const double bk_norm = spectral_norm(B0.transpose() * K);
    double coupling = 0.0;
    if (bk_norm > 0.0)
        coupling = 2.0 * std::max(std::pow(c, blocks.largest()), c) * bk_norm;
    const double denom = bf_norm + coupling;
    return 2.0 / (finv_norm * denom * denom);
}

SynthesisArtifacts synthesize(const CanonicalSystem& system, const SynthesisOptions& options)
{
    if (!(options.gamma > 0.0 && options.gamma < 1.0))
        throw DomainError("gamma must lie in (0, 1)");
    if (!(options.c > 0.0))
        throw DomainError("c must be positive");

    SynthesisArtifacts art{system, {}, {}, {}, {}, 0.0, 0.0, options.c, options.gamma};
    const BlockStructure& blocks = system.blocks;
    art.Finv = gram_inverse(blocks);
    art.F = invert_gramian(blocks);
    art.H = build_H(blocks);
    art.F1 = build_F1(art.F, art.H, blocks);
    art.a0_bound = a0_max(art.F, art.Finv, system.K, system.B0, blocks, options.c);
    if (!(art.a0_bound > 0.0))
        throw DomainError("no admissible a0: the ellipsoid level is unbounded while K != 0");
    art.a0 = options.a0.value_or(art.a0_bound);
    if (!(art.a0 > 0.0))
        throw DomainError("a0 must be positive");
    return art;
}

namespace
{

// Log-domain evaluation of phi(s) = log(2 a0 theta) - log((F y, y)),
// y = D(theta) x, s = log(theta). phi has the sign of
// g(theta) = 2 a0 theta - (D F D x, x) and stays finite for any s.
struct LogResidual
{
    const SynthesisArtifacts& art;
    const Vector& x;
    Vector h;
    Vector logx;
    Vector yhat;

    LogResidual(const SynthesisArtifacts& a, const Vector& xx) : art(a), x(xx)
    {
        h = a.H.diagonal();
        logx.resize(x.size());
        for (Eigen::Index m = 0; m < x.size(); ++m)
            logx[m] = x[m] != 0.0 ? std::log(std::abs(x[m]))
                                  : -std::numeric_limits<double>::infinity();
        yhat.resize(x.size());
    }

    // Returns phi and writes d phi / d s.
    double operator()(double s, double* slope = nullptr)
    {
        double lmax = -std::numeric_limits<double>::infinity();
        for (Eigen::Index m = 0; m < x.size(); ++m)
            lmax = std::max(lmax, logx[m] + h[m] * s);
        for (Eigen::Index m = 0; m < x.size(); ++m)
            yhat[m] = x[m] == 0.0 ? 0.0 : std::copysign(std::exp(logx[m] + h[m] * s - lmax), x[m]);
        const Vector fy = art.F * yhat;
        const double q = yhat.dot(fy);
        if (slope)
        {
            double weighted = 0.0;
            for (Eigen::Index m = 0; m < x.size(); ++m)
                weighted += h[m] * yhat[m] * fy[m];
            *slope = 1.0 - 2.0 * weighted / q;
        }
        return std::log(2.0 * art.a0) + s - 2.0 * lmax - std::log(q);
    }
};

constexpr double zero_state_norm = 1e-14;
constexpr double theta_floor = 1e-30;
constexpr double theta_ceiling = 1e30;

} // namespace

ThetaSolution solve_theta_detailed(const SynthesisArtifacts& art, const Vector& x)
{
    ThetaSolution sol;
    if (x.norm() < zero_state_norm)
        return sol;

    LogResidual phi(art, x);
    const double s_min = std::log(theta_floor);
    const double s_max = std::log(theta_ceiling);
    const double step = std::log(2.0);

    double lo = 0.0;
    double hi = 0.0;
    const double phi0 = phi(0.0);
    if (phi0 == 0.0)
    {
        sol.theta = 1.0;
        return sol;
    }
    if (phi0 < 0.0)
    {
        hi = lo;
        while (phi(hi) < 0.0)
        {
            lo = hi;
            hi += step;
            if (hi > s_max)
                throw NumericalError("theta bracket exceeds 1e30 (state too large for a0)");
        }
    }
    else
    {
        lo = hi;
        while (phi(lo) > 0.0)
        {
            hi = lo;
            lo -= step;
            if (lo < s_min)
                throw NumericalError("theta bracket falls below 1e-30");
        }
    }

    // Relative width of the theta bracket is exp(hi - lo) - 1.
    while (hi - lo > 1e-12)
    {
        const double mid = 0.5 * (lo + hi);
        (phi(mid) < 0.0 ? lo : hi) = mid;
        ++sol.bisections;
    }

    double s = 0.5 * (lo + hi);
    for (int it = 0; it < 8; ++it)
    {
        double slope = 0.0;
        const double value = phi(s, &slope);
        if (value == 0.0 || !(slope > 0.0))
            break;
        const double next = s - value / slope;
        if (!(next >= lo - 1e-12 && next <= hi + 1e-12))
            break;
        ++sol.newton_steps;
        const bool done = std::abs(next - s) < 1e-15;
        s = next;
        if (done)
            break;
    }

    sol.theta = std::exp(s);
    sol.residual = std::abs(std::expm1(-phi(s)));
    if (sol.residual > 1e-10)
        throw NumericalError("theta residual " + std::to_string(sol.residual) +
                             " exceeds 1e-10");
    return sol;
}

ThetaSolution solve_theta_near(const SynthesisArtifacts& art, const Vector& x, double hint)
{
    if (!(hint > 0.0) || !std::isfinite(hint))
        return solve_theta_detailed(art, x);
    ThetaSolution sol;
    if (x.norm() < zero_state_norm)
        return sol;

    LogResidual phi(art, x);
    double s = std::log(hint);
    double slope = 0.0;
    double value = phi(s, &slope);
    // Expand a bracket around the hint, 1e-3 relative first.
    double width = 1e-3;
    double lo = s;
    double hi = s;
    if (value < 0.0)
    {
        for (hi = s + width; phi(hi) < 0.0; hi += width)
        {
            lo = hi;
            width *= 4.0;
            if (hi > std::log(theta_ceiling))
                return solve_theta_detailed(art, x);
        }
    }
    else if (value > 0.0)
    {
        for (lo = s - width; phi(lo) > 0.0; lo -= width)
        {
            hi = lo;
            width *= 4.0;
            if (lo < std::log(theta_floor))
                return solve_theta_detailed(art, x);
        }
    }
    else
    {
        sol.theta = hint;
        return sol;
    }

    s = 0.5 * (lo + hi);
    for (int it = 0; it < 100 && hi - lo > 1e-15; ++it)
    {
        value = phi(s, &slope);
        if (value == 0.0)
            break;
        (value < 0.0 ? lo : hi) = s;
        double next = slope > 0.0 ? s - value / slope : 0.5 * (lo + hi);
        if (!(next > lo && next < hi))
        {
            next = 0.5 * (lo + hi);
            ++sol.bisections;
        }
        else
        {
            ++sol.newton_steps;
        }
        const bool done = std::abs(next - s) < 1e-15;
        s = next;
        if (done)
            break;
    }

    sol.theta = std::exp(s);
    sol.residual = std::abs(std::expm1(-phi(s)));
    if (sol.residual > 1e-10)
        return solve_theta_detailed(art, x);
    return sol;
}

double solve_theta(const SynthesisArtifacts& art, const Vector& x)
{
    return solve_theta_detailed(art, x).theta;
}

Vector control_at(const SynthesisArtifacts& art, const Vector& x, double theta)
{
    const BlockStructure& blocks = art.blocks();
    Vector u = Vector::Zero(blocks.count());
    if (!(theta > 0.0) || x.norm() < zero_state_norm)
        return u;
    const Vector d = build_D(blocks, theta);
    const Vector y = d.cwiseProduct(x);
    const Vector v = d.cwiseProduct(art.F * y);
    const Vector kx = art.system.K * x;
    for (int i = 0; i < blocks.count(); ++i)
    {
        const int row = blocks.control_row(i);
        u[i] = -0.5 * v[row] - kx[row];
    }
    return u;
}

Vector control(const SynthesisArtifacts& art, const Vector& x)
{
    return control_at(art, x, solve_theta(art, x));
}

} // namespace cfs
