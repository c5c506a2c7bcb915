#pragma once

// Small dense matrices over exact rationals. The Gramian blocks are
// Hilbert-like, so inversion and minor enumeration are done exactly.

#include "cfsynth/model.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <vector>

namespace cfs
{

using Rational = boost::multiprecision::cpp_rational;

class RationalMatrix
{
public:
    RationalMatrix() = default;
    RationalMatrix(int rows, int cols) : rows_(rows), cols_(cols), data_(rows * cols) {}

    static RationalMatrix identity(int n);

    int rows() const { return rows_; }
    int cols() const { return cols_; }

    Rational& operator()(int r, int c) { return data_[r * cols_ + c]; }
    const Rational& operator()(int r, int c) const { return data_[r * cols_ + c]; }

    RationalMatrix operator*(const RationalMatrix& rhs) const;
    bool operator==(const RationalMatrix&) const = default;

    Matrix to_double() const;

private:
    int rows_ = 0;
    int cols_ = 0;
    std::vector<Rational> data_;
};

/// Exact Gauss-Jordan inverse. Throws NumericalError if singular.
RationalMatrix inverse(const RationalMatrix& a);

/// Exact determinant by fraction-preserving elimination.
Rational determinant(const RationalMatrix& a);

/// Submatrix on the given (sorted) row and column index sets.
RationalMatrix submatrix(const RationalMatrix& a, const std::vector<int>& rows,
                         const std::vector<int>& cols);

} // namespace cfs
