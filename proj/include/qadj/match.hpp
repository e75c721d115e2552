#pragma once

#include <cstddef>
#include <vector>

#include "qadj/extract.hpp"
#include "qadj/linalg.hpp"
#include "qadj/rotations.hpp"

namespace qadj {

// D x K array of points, D in {1,2,3}, stored point-major.
class PointCloud {
public:
    PointCloud(int dim, std::size_t count);
    static PointCloud from_rows(int dim, const std::vector<double>& point_major);

    int dim() const { return dim_; }
    std::size_t count() const { return count_; }

    double at(std::size_t k, int d) const { return data_[k * dim_ + d]; }
    double& at(std::size_t k, int d) { return data_[k * dim_ + d]; }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    void validate() const; // finite entries, K >= 1

private:
    int dim_;
    std::size_t count_;
    std::vector<double> data_;
};

// Rectangular cross-covariance sum_k x_k u_k^T, rows = dim(x), cols = dim(u).
struct CrossCov {
    int rows = 0, cols = 0;
    std::array<double, 9> e{};

    double operator()(int r, int c) const { return e[r * cols + c]; }
    double& operator()(int r, int c) { return e[r * cols + c]; }

    Mat3 to_mat3() const;
    Mat2 to_mat2() const;
};

// Throws ShapeMismatch when counts differ or dims are out of range.
CrossCov cross_covariance(const PointCloud& x, const PointCloud& u);

struct Match2Result {
    Adjugate2 adjugate; // alpha, beta, gamma of the closed form
    Quat2 q_opt;
    Rotation2 r_opt = rot2_from_angle(0.0);
    double lambda_opt = 0.0;
    double loss = 0.0;
};

struct Match3Result {
    AdjugateMatrix4 adjugate;
    Quaternion q_opt;
    Rotation3 r_opt = rot3_from_quat(Quaternion{});
    double lambda_opt = 0.0;
    double loss = 0.0;
};

// Closed-form 2D alignment: alpha = (1 + (xu+yv)/lambda)/2, gamma =
// (xv-yu)/(2 lambda), with lambda = hypot(xu+yv, xv-yu).  Throws
// DegenerateData when lambda vanishes against the data scale.
Match2Result match2d(const PointCloud& x, const PointCloud& u);

// Traceless symmetric profile matrix M(E) of a 3x3 cross-covariance.
SymMat4 profile_matrix_3d(const Mat3& e);

// 3D alignment via the maximal eigenvector of M(X U^T), extracted through the
// adjugate of the characteristic matrix.
Match3Result match3d(const PointCloud& x, const PointCloud& u);

// tr(X X^T) = sum_k |x_k|^2; equals the maximal eigenvalue of M(X U^T) for
// noise-free u = R x.
double exact_data_eigenvalue(const PointCloud& x);

// sum_k |R x_k - u_k|^2 for same-dimension clouds (2D or 3D).
double match_loss(const Mat2& r, const PointCloud& x, const PointCloud& u);
double match_loss(const Mat3& r, const PointCloud& x, const PointCloud& u);

} // namespace qadj
