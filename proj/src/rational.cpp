#include "cfsynth/rational.hpp"

#include <utility>

namespace cfs
{

RationalMatrix RationalMatrix::identity(int n)
{
    RationalMatrix out(n, n);
    for (int i = 0; i < n; ++i)
        out(i, i) = 1;
    return out;
}

RationalMatrix RationalMatrix::operator*(const RationalMatrix& rhs) const
{
    RationalMatrix out(rows_, rhs.cols_);
    for (int i = 0; i < rows_; ++i)
        for (int k = 0; k < cols_; ++k)
        {
            if ((*this)(i, k) == 0)
                continue;
            for (int j = 0; j < rhs.cols_; ++j)
                out(i, j) += (*this)(i, k) * rhs(k, j);
        }
    return out;
}

Matrix RationalMatrix::to_double() const
{
    Matrix out(rows_, cols_);
    for (int i = 0; i < rows_; ++i)
        for (int j = 0; j < cols_; ++j)
            out(i, j) = (*this)(i, j).convert_to<double>();
    return out;
}

RationalMatrix inverse(const RationalMatrix& a)
{
    if (a.rows() != a.cols())
        throw NumericalError("cannot invert a non-square matrix");
    const int n = a.rows();
    RationalMatrix work = a;
    RationalMatrix inv = RationalMatrix::identity(n);
    for (int col = 0; col < n; ++col)
    {
        int pivot = col;
        while (pivot < n && work(pivot, col) == 0)
            ++pivot;
        if (pivot == n)
            throw NumericalError("matrix is singular");
        if (pivot != col)
            for (int j = 0; j < n; ++j)
            {
                std::swap(work(pivot, j), work(col, j));
                std::swap(inv(pivot, j), inv(col, j));
            }
        const Rational p = work(col, col);
        for (int j = 0; j < n; ++j)
        {
            work(col, j) /= p;
            inv(col, j) /= p;
        }
        for (int r = 0; r < n; ++r)
        {
            if (r == col || work(r, col) == 0)
                continue;
            const Rational f = work(r, col);
            for (int j = 0; j < n; ++j)
            {
                work(r, j) -= f * work(col, j);
                inv(r, j) -= f * inv(col, j);
            }
        }
    }
    return inv;
}

Rational determinant(const RationalMatrix& a)
{
    if (a.rows() != a.cols())
        throw NumericalError("determinant of a non-square matrix");
    const int n = a.rows();
    RationalMatrix work = a;
    Rational det = 1;
    for (int col = 0; col < n; ++col)
    {
        int pivot = col;
        while (pivot < n && work(pivot, col) == 0)
            ++pivot;
        if (pivot == n)
            return 0;
        if (pivot != col)
        {
            for (int j = 0; j < n; ++j)
                std::swap(work(pivot, j), work(col, j));
            det = -det;
        }
        det *= work(col, col);
        for (int r = col + 1; r < n; ++r)
        {
            if (work(r, col) == 0)
                continue;
            const Rational f = work(r, col) / work(col, col);
            for (int j = col; j < n; ++j)
                work(r, j) -= f * work(col, j);
        }
    }
    return det;
}

RationalMatrix submatrix(const RationalMatrix& a, const std::vector<int>& rows,
                         const std::vector<int>& cols)
{
    RationalMatrix out(static_cast<int>(rows.size()), static_cast<int>(cols.size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < cols.size(); ++j)
            out(static_cast<int>(i), static_cast<int>(j)) = a(rows[i], cols[j]);
    return out;
}

} // namespace cfs
