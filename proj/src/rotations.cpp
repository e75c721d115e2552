#include "qadj/rotations.hpp"

#include <cmath>

namespace qadj {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

} // namespace

double Quaternion::norm() const
{
    return std::sqrt(dot(*this));
}

Quaternion Quaternion::normalized() const
{
    double n = norm();
    if (n == 0.0 || !std::isfinite(n)) throw NotUnit("Quaternion::normalized: zero or non-finite norm");
    return {q0 / n, q1 / n, q2 / n, q3 / n};
}

Quaternion Quaternion::canonicalized(double tol) const
{
    const double c[4] = {q0, q1, q2, q3};
    for (double v : c) {
        if (std::abs(v) < tol) continue;
        return v > 0.0 ? *this : -*this;
    }
    return *this;
}

Quaternion Quaternion::operator*(const Quaternion& o) const
{
    return {
        q0 * o.q0 - q1 * o.q1 - q2 * o.q2 - q3 * o.q3,
        q0 * o.q1 + q1 * o.q0 + q2 * o.q3 - q3 * o.q2,
        q0 * o.q2 - q1 * o.q3 + q2 * o.q0 + q3 * o.q1,
        q0 * o.q3 + q1 * o.q2 - q2 * o.q1 + q3 * o.q0,
    };
}

AxisAngle AxisAngle::of(double theta, const std::array<double, 3>& axis)
{
    ensure_finite(axis.data(), 3, "AxisAngle");
    if (!std::isfinite(theta)) throw InvalidArgument("AxisAngle: non-finite angle");
    double n = std::sqrt(axis[0] * axis[0] + axis[1] * axis[1] + axis[2] * axis[2]);
    if (std::abs(n - 1.0) > 1e-12) throw AxisNotUnit("AxisAngle: axis norm deviates from 1");
    double t = std::fmod(theta, 2.0 * kTwoPi);
    if (t < 0.0) t += 2.0 * kTwoPi;
    return AxisAngle{t, axis};
}

Rotation3 Rotation3::exact(const Mat3& m)
{
    if (!m.finite()) throw InvalidArgument("Rotation3: non-finite entry");
    Mat3 g = m.transpose() * m;
    Mat3 dev = g - Mat3::identity();
    if (dev.max_abs() > 1e-12) throw InvalidArgument("Rotation3: not orthonormal");
    if (std::abs(det(m) - 1.0) > 1e-12) throw InvalidArgument("Rotation3: determinant not 1");
    Rotation3 r;
    r.m_ = m;
    return r;
}

Quat2 Quat2::of(double a, double b)
{
    if (!std::isfinite(a) || !std::isfinite(b)) throw InvalidArgument("Quat2: non-finite entry");
    if (std::abs(a * a + b * b - 1.0) > 1e-9) throw NotUnit("Quat2: a^2 + b^2 deviates from 1");
    return Quat2{a, b};
}

Quat2 Quat2::normalized() const
{
    double n = std::hypot(a, b);
    if (n == 0.0 || !std::isfinite(n)) throw NotUnit("Quat2::normalized: zero or non-finite norm");
    return Quat2{a / n, b / n};
}

Rotation2 Rotation2::exact(const Mat2& m)
{
    if (!m.finite()) throw InvalidArgument("Rotation2: non-finite entry");
    Mat2 g = m.transpose() * m;
    if ((g - Mat2::identity()).max_abs() > 1e-12 || std::abs(det(m) - 1.0) > 1e-12)
        throw InvalidArgument("Rotation2: not a proper rotation");
    Rotation2 r;
    r.m_ = m;
    return r;
}

Rotation3 rot3_from_quat(const Quaternion& q)
{
    if (std::abs(q.dot(q) - 1.0) > 1e-9) throw NotUnit("rot3_from_quat: quaternion not unit");
    const double q0 = q.q0, q1 = q.q1, q2 = q.q2, q3 = q.q3;
    Rotation3 r;
    Mat3& m = r.m_;
    m(0, 0) = q0 * q0 + q1 * q1 - q2 * q2 - q3 * q3;
    m(0, 1) = 2.0 * q1 * q2 - 2.0 * q0 * q3;
    m(0, 2) = 2.0 * q1 * q3 + 2.0 * q0 * q2;
    m(1, 0) = 2.0 * q1 * q2 + 2.0 * q0 * q3;
    m(1, 1) = q0 * q0 - q1 * q1 + q2 * q2 - q3 * q3;
    m(1, 2) = 2.0 * q2 * q3 - 2.0 * q0 * q1;
    m(2, 0) = 2.0 * q1 * q3 - 2.0 * q0 * q2;
    m(2, 1) = 2.0 * q2 * q3 + 2.0 * q0 * q1;
    m(2, 2) = q0 * q0 - q1 * q1 - q2 * q2 + q3 * q3;
    return r;
}

Rotation3 rot3_from_axis_angle(const AxisAngle& aa)
{
    return rot3_from_quat(quat_from_axis_angle(aa));
}

Quaternion quat_from_axis_angle(const AxisAngle& aa)
{
    double h = aa.theta / 2.0;
    double c = std::cos(h), s = std::sin(h);
    return {c, s * aa.axis[0], s * aa.axis[1], s * aa.axis[2]};
}

Rotation2 rot2_from_quat2(const Quat2& p)
{
    if (std::abs(p.a * p.a + p.b * p.b - 1.0) > 1e-9) throw NotUnit("rot2_from_quat2: not unit");
    double c = p.a * p.a - p.b * p.b;
    double s = 2.0 * p.a * p.b;
    Rotation2 r;
    r.m_(0, 0) = c;
    r.m_(0, 1) = -s;
    r.m_(1, 0) = s;
    r.m_(1, 1) = c;
    return r;
}

Rotation2 rot2_from_angle(double theta)
{
    double c = std::cos(theta), s = std::sin(theta);
    Rotation2 r;
    r.m_(0, 0) = c;
    r.m_(0, 1) = -s;
    r.m_(1, 0) = s;
    r.m_(1, 1) = c;
    return r;
}

Quaternion shepperd_extract(const Mat3& m)
{
    if (!m.finite()) throw InvalidArgument("shepperd_extract: non-finite entry");
    double tr = m(0, 0) + m(1, 1) + m(2, 2);
    double q0, q1, q2, q3;
    if (tr > 0.0) {
        double s = std::sqrt(tr + 1.0);
        q0 = s / 2.0;
        s = 1.0 / (2.0 * s);
        q1 = (m(2, 1) - m(1, 2)) * s;
        q2 = (m(0, 2) - m(2, 0)) * s;
        q3 = (m(1, 0) - m(0, 1)) * s;
    } else if (m(0, 0) >= m(1, 1) && m(0, 0) >= m(2, 2)) {
        double s = std::sqrt(m(0, 0) - m(1, 1) - m(2, 2) + 1.0);
        q1 = s / 2.0;
        s = 1.0 / (2.0 * s);
        q0 = (m(2, 1) - m(1, 2)) * s;
        q2 = (m(1, 0) + m(0, 1)) * s;
        q3 = (m(0, 2) + m(2, 0)) * s;
    } else if (m(0, 0) < m(1, 1) && m(0, 0) >= m(2, 2)) {
        double s = std::sqrt(m(1, 1) - m(2, 2) - m(0, 0) + 1.0);
        q2 = s / 2.0;
        s = 1.0 / (2.0 * s);
        q0 = (m(0, 2) - m(2, 0)) * s;
        q3 = (m(2, 1) + m(1, 2)) * s;
        q1 = (m(1, 0) + m(0, 1)) * s;
    } else {
        double s = std::sqrt(m(2, 2) - m(0, 0) - m(1, 1) + 1.0);
        q3 = s / 2.0;
        s = 1.0 / (2.0 * s);
        q0 = (m(1, 0) - m(0, 1)) * s;
        q1 = (m(0, 2) + m(2, 0)) * s;
        q2 = (m(2, 1) + m(1, 2)) * s;
    }
    return Quaternion{q0, q1, q2, q3}.normalized().canonicalized();
}

} // namespace qadj
