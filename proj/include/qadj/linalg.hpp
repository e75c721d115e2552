#pragma once

#include <array>
#include <cstddef>

#include "qadj/errors.hpp"

namespace qadj {

// Fixed-size square matrices for dimensions 2..5.  Determinant and adjugate
// are provided for N <= 4; 5x5 matrices support only entry storage and 3x3
// subdeterminant extraction (the cross-covariance container needs nothing
// more).
template <std::size_t N>
struct Mat {
    std::array<double, N * N> a{};

    double& operator()(std::size_t r, std::size_t c) { return a[r * N + c]; }
    double operator()(std::size_t r, std::size_t c) const { return a[r * N + c]; }

    static Mat identity()
    {
        Mat m;
        for (std::size_t i = 0; i < N; ++i) m(i, i) = 1.0;
        return m;
    }

    Mat transpose() const
    {
        Mat t;
        for (std::size_t r = 0; r < N; ++r)
            for (std::size_t c = 0; c < N; ++c) t(c, r) = (*this)(r, c);
        return t;
    }

    Mat operator*(const Mat& o) const
    {
        Mat p;
        for (std::size_t r = 0; r < N; ++r)
            for (std::size_t c = 0; c < N; ++c) {
                double s = 0.0;
                for (std::size_t k = 0; k < N; ++k) s += (*this)(r, k) * o(k, c);
                p(r, c) = s;
            }
        return p;
    }

    Mat operator-(const Mat& o) const
    {
        Mat d;
        for (std::size_t i = 0; i < N * N; ++i) d.a[i] = a[i] - o.a[i];
        return d;
    }

    Mat operator+(const Mat& o) const
    {
        Mat s;
        for (std::size_t i = 0; i < N * N; ++i) s.a[i] = a[i] + o.a[i];
        return s;
    }

    Mat operator*(double s) const
    {
        Mat m;
        for (std::size_t i = 0; i < N * N; ++i) m.a[i] = a[i] * s;
        return m;
    }

    double frobenius() const;
    double max_abs() const;
    bool finite() const;
};

using Mat2 = Mat<2>;
using Mat3 = Mat<3>;
using Mat4 = Mat<4>;
using Mat5 = Mat<5>;

double det(const Mat2& m);
double det(const Mat3& m);
double det(const Mat4& m);

// Transposed cofactor matrix; satisfies m * adjugate(m) = det(m) * I even for
// singular m.
Mat2 adjugate(const Mat2& m);
Mat3 adjugate(const Mat3& m);
Mat4 adjugate(const Mat4& m);

// 3x3 determinant of the submatrix of a 5x5 array selected by row/column
// index triples.
double sub3det(const Mat5& m, const std::array<std::size_t, 3>& rows,
               const std::array<std::size_t, 3>& cols);

void ensure_finite(const double* p, std::size_t n, const char* what);

// Symmetric 4x4 matrix stored as its upper triangle, so symmetry holds
// exactly.  Entry order: 00,01,02,03,11,12,13,22,23,33.
class SymMat4 {
public:
    SymMat4() = default;
    explicit SymMat4(const std::array<double, 10>& upper);
    static SymMat4 from_mat(const Mat4& m); // averages the off-diagonal pairs

    double operator()(std::size_t i, std::size_t j) const { return u_[idx(i, j)]; }
    void set(std::size_t i, std::size_t j, double v) { u_[idx(i, j)] = v; }

    double trace() const { return u_[0] + u_[4] + u_[7] + u_[9]; }
    double frobenius() const;
    Mat4 to_mat() const;

    // m with lambda subtracted from each diagonal entry.
    SymMat4 shifted(double lambda) const;

private:
    static std::size_t idx(std::size_t i, std::size_t j);
    std::array<double, 10> u_{};
};

SymMat4 char_matrix(const SymMat4& m, double lambda);

// Eigenvalues of a symmetric 4x4 matrix, sorted descending, with the
// characteristic-determinant residual |det(m - r I)| recorded per root.
struct QuarticRoots {
    std::array<double, 4> roots{};
    std::array<double, 4> residuals{};
};

// Analytic quartic (trace-shifted, Frobenius-normalized Ferrari), three
// Newton polish steps on det(m - lambda I), cyclic-Jacobi fallback when the
// analytic path leaves a residual above 1e-9 * ||m||_F^4.  Throws
// NonConvergence if both paths fail.
QuarticRoots eigenvalues_sym4(const SymMat4& m);
double max_eigenvalue_sym4(const SymMat4& m);

} // namespace qadj
