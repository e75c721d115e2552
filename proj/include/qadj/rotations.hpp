#pragma once

#include <array>

#include "qadj/linalg.hpp"

namespace qadj {

// Unit 4-vector (q0,q1,q2,q3); q and -q describe the same rotation.
struct Quaternion {
    double q0 = 1.0, q1 = 0.0, q2 = 0.0, q3 = 0.0;

    double dot(const Quaternion& o) const
    {
        return q0 * o.q0 + q1 * o.q1 + q2 * o.q2 + q3 * o.q3;
    }
    double norm() const;
    Quaternion normalized() const;

    // q0 made positive; when |q0| < tol the first component above tol is made
    // positive instead.
    Quaternion canonicalized(double tol = 1e-10) const;

    Quaternion operator-() const { return {-q0, -q1, -q2, -q3}; }

    // Hamilton product, scalar-first convention.
    Quaternion operator*(const Quaternion& o) const;

    std::array<double, 4> as_array() const { return {q0, q1, q2, q3}; }
};

// Angle in [0, 4pi) (double cover) about a unit axis.
struct AxisAngle {
    double theta;
    std::array<double, 3> axis;

    // throws AxisNotUnit when ||axis| - 1| > 1e-12; theta wrapped into [0,4pi)
    static AxisAngle of(double theta, const std::array<double, 3>& axis);
};

// Proper orthonormal 3x3 rotation.  Construction via exact() validates
// R^T R = I and det R = 1 to 1e-12; measured (noisy, near-rotation) matrices
// are passed around as plain Mat3.
class Rotation3 {
public:
    static Rotation3 exact(const Mat3& m);
    const Mat3& matrix() const { return m_; }
    double operator()(std::size_t r, std::size_t c) const { return m_(r, c); }

private:
    friend Rotation3 rot3_from_quat(const Quaternion&);
    Rotation3() = default;
    Mat3 m_;
};

// 2D half-angle pair a = cos(theta/2), b = sin(theta/2).
struct Quat2 {
    double a = 1.0, b = 0.0;

    static Quat2 of(double a, double b); // throws NotUnit beyond 1e-9
    Quat2 normalized() const;
    double dot(const Quat2& o) const { return a * o.a + b * o.b; }

    // embedding as a z-axis quaternion, for shared error metrics
    Quaternion as_quaternion() const { return {a, 0.0, 0.0, b}; }
};

class Rotation2 {
public:
    static Rotation2 exact(const Mat2& m);
    const Mat2& matrix() const { return m_; }
    double operator()(std::size_t r, std::size_t c) const { return m_(r, c); }

private:
    friend Rotation2 rot2_from_quat2(const Quat2&);
    friend Rotation2 rot2_from_angle(double);
    Rotation2() = default;
    Mat2 m_;
};

// The quadratic-form rotation matrix of a unit quaternion.  Throws NotUnit
// when |q.q - 1| > 1e-9.  Satisfies rot3_from_quat(q) == rot3_from_quat(-q)
// entry-wise.
Rotation3 rot3_from_quat(const Quaternion& q);

Rotation3 rot3_from_axis_angle(const AxisAngle& aa);

// (cos(theta/2), sin(theta/2) n); covers 0 <= theta < 4pi.
Quaternion quat_from_axis_angle(const AxisAngle& aa);

Rotation2 rot2_from_quat2(const Quat2& p);
Rotation2 rot2_from_angle(double theta);

// Classic branchy trace / max-diagonal extraction.  Follows the branch
// predicates of the reference listing (tr > 0; m11 >= m22 && m11 >= m33;
// m11 < m22 && m11 >= m33; else) -- a common variant uses strict inequalities
// when scanning the diagonal instead.  The result is normalized and sign
// canonicalized rather than sign-randomized.  Accepts measured entries; the
// result is meaningless for wildly non-orthogonal input.
Quaternion shepperd_extract(const Mat3& r);

} // namespace qadj
