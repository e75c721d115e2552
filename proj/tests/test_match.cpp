#include <doctest.h>

#include <cmath>

#include "qadj/match.hpp"
#include "qadj/rng.hpp"

using namespace qadj;

namespace {

constexpr double kPi = 3.14159265358979323846;

PointCloud random_cloud(int dim, std::size_t k, Rng& rng, double spread = 1.0)
{
    PointCloud c(dim, k);
    for (std::size_t i = 0; i < k; ++i)
        for (int d = 0; d < dim; ++d) c.at(i, d) = rng.uniform_sym(spread);
    return c;
}

PointCloud rotate2(const Rotation2& r, const PointCloud& x)
{
    PointCloud u(2, x.count());
    for (std::size_t k = 0; k < x.count(); ++k) {
        u.at(k, 0) = r(0, 0) * x.at(k, 0) + r(0, 1) * x.at(k, 1);
        u.at(k, 1) = r(1, 0) * x.at(k, 0) + r(1, 1) * x.at(k, 1);
    }
    return u;
}

PointCloud rotate3(const Rotation3& r, const PointCloud& x)
{
    PointCloud u(3, x.count());
    for (std::size_t k = 0; k < x.count(); ++k)
        for (int i = 0; i < 3; ++i)
            u.at(k, i) = r(i, 0) * x.at(k, 0) + r(i, 1) * x.at(k, 1) + r(i, 2) * x.at(k, 2);
    return u;
}

double brute_force_loss3(const Mat3& r, const PointCloud& x, const PointCloud& u)
{
    // independent accumulation order: per point, then per coordinate, reversed
    double s = 0.0;
    for (std::size_t k = x.count(); k-- > 0;) {
        double acc = 0.0;
        for (int i = 2; i >= 0; --i) {
            double p = r(std::size_t(i), 0) * x.at(k, 0) + r(std::size_t(i), 1) * x.at(k, 1)
                     + r(std::size_t(i), 2) * x.at(k, 2) - u.at(k, i);
            acc += p * p;
        }
        s += acc;
    }
    return s;
}

double quat_distance_up_to_sign(const Quaternion& a, const Quaternion& b)
{
    double dp = 0, dm = 0;
    auto aa = a.as_array(), bb = b.as_array();
    for (int i = 0; i < 4; ++i) {
        dp += (aa[i] - bb[i]) * (aa[i] - bb[i]);
        dm += (aa[i] + bb[i]) * (aa[i] + bb[i]);
    }
    return std::sqrt(std::min(dp, dm));
}

} // namespace

TEST_CASE("cross_covariance shapes and values")
{
    PointCloud x(3, 1), u(3, 1);
    x.at(0, 0) = 1;
    u.at(0, 0) = 1;
    CrossCov e = cross_covariance(x, u);
    CHECK(e(0, 0) == 1.0);
    double rest = 0;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) rest += (r + c > 0) ? std::abs(e(r, c)) : 0.0;
    CHECK(rest == 0.0);

    // orthonormal frame columns: E = X X^T R^T = R^T
    Rng rng(31);
    Quaternion q = random_unit_quaternion(rng);
    Rotation3 r = rot3_from_quat(q);
    PointCloud frame(3, 3);
    frame.at(0, 0) = frame.at(1, 1) = frame.at(2, 2) = 1.0;
    PointCloud rotated = rotate3(r, frame);
    Mat3 e2 = cross_covariance(frame, rotated).to_mat3();
    CHECK((e2 - r.matrix().transpose()).max_abs() < 1e-15);

    // K=2 planar pair
    PointCloud x2(3, 2), u2(3, 2);
    x2.at(0, 0) = 1;
    x2.at(1, 1) = 1;
    u2 = x2;
    Mat3 e3 = cross_covariance(x2, u2).to_mat3();
    CHECK(e3(0, 0) == 1.0);
    CHECK(e3(1, 1) == 1.0);
    CHECK(e3(2, 2) == 0.0);

    // mixed dims supported: (3,2) and (2,1)
    PointCloud img(2, 2);
    CHECK_NOTHROW(cross_covariance(x2, img));
    PointCloud line(1, 2);
    PointCloud plane(2, 2);
    CHECK_NOTHROW(cross_covariance(plane, line));

    PointCloud mismatched(3, 3);
    CHECK_THROWS_AS(cross_covariance(x2, mismatched), ShapeMismatch);
    CHECK_THROWS_AS(cross_covariance(line, plane), ShapeMismatch);
}

TEST_CASE("match2d identity and exact rotations")
{
    Rng rng(32);
    PointCloud x = random_cloud(2, 20, rng);
    Match2Result res = match2d(x, x);
    CHECK(res.adjugate.alpha == doctest::Approx(1.0));
    CHECK(std::abs(res.adjugate.beta) < 1e-15);
    CHECK(std::abs(res.adjugate.gamma) < 1e-15);
    CHECK((res.r_opt.matrix() - Mat2::identity()).max_abs() < 1e-15);

    for (int i = 0; i < 200; ++i) {
        double th = rng.uniform01() * 2 * kPi;
        Rotation2 rg = rot2_from_angle(th);
        PointCloud u = rotate2(rg, x);
        Match2Result r = match2d(x, u);
        CHECK((r.r_opt.matrix() - rg.matrix()).max_abs() < 1e-12);
        CHECK(r.loss < 1e-18 * exact_data_eigenvalue(x));
        CHECK(std::abs(r.adjugate.alpha + r.adjugate.beta - 1.0) < 1e-12);
        CHECK(std::abs(r.adjugate.alpha * r.adjugate.beta - r.adjugate.gamma * r.adjugate.gamma)
              < 1e-10);
    }

    Mat2 quarter = rot2_from_angle(kPi / 2).matrix();
    PointCloud uq = rotate2(rot2_from_angle(kPi / 2), x);
    Match2Result rq = match2d(x, uq);
    CHECK((rq.r_opt.matrix() - quarter).max_abs() < 1e-12);
}

TEST_CASE("match2d outperforms the generator on noisy data")
{
    Rng rng(33);
    int wins = 0;
    for (int i = 0; i < 100; ++i) {
        PointCloud x = random_cloud(2, 30, rng);
        double th = rng.uniform01() * 2 * kPi;
        Rotation2 rg = rot2_from_angle(th);
        PointCloud u = rotate2(rg, x);
        for (double& v : u.data()) v += 0.1 * rng.normal();
        Match2Result r = match2d(x, u);
        double lgen = match_loss(rg.matrix(), x, u);
        CHECK(r.loss <= lgen + 1e-12);
        if (r.loss <= lgen) ++wins;
    }
    CHECK(wins == 100); // the closed form is the global optimum
}

TEST_CASE("match2d rejects rotationally ambiguous data")
{
    PointCloud x(2, 2), u(2, 2);
    x.at(0, 0) = 1;
    x.at(1, 1) = 1;
    // u = 0: every rotation scores the same
    CHECK_THROWS_AS(match2d(x, u), DegenerateData);
}

TEST_CASE("match2d agrees with the 2x2 eigen route")
{
    Rng rng(34);
    for (int i = 0; i < 200; ++i) {
        PointCloud x = random_cloud(2, 25, rng);
        double th = rng.uniform01() * 2 * kPi;
        PointCloud u = rotate2(rot2_from_angle(th), x);
        for (double& v : u.data()) v += 0.05 * rng.normal();

        Match2Result direct = match2d(x, u);
        // the implied measured matrix is E^T: d = (xu+yv)/2, t = (xv-yu)/2
        Mat2 et = cross_covariance(x, u).to_mat2().transpose();
        Extraction2Result eig = extract_quat2_noisy(et);
        CHECK(std::abs(direct.adjugate.alpha - eig.adjugate.alpha) < 1e-10);
        CHECK(std::abs(direct.adjugate.beta - eig.adjugate.beta) < 1e-10);
        CHECK(std::abs(direct.adjugate.gamma - eig.adjugate.gamma) < 1e-10);
    }
}

TEST_CASE("profile_matrix_3d entries")
{
    SymMat4 m = profile_matrix_3d(Mat3::identity());
    CHECK(m(0, 0) == 3.0);
    CHECK(m(1, 1) == -1.0);
    CHECK(m(2, 2) == -1.0);
    CHECK(m(3, 3) == -1.0);
    CHECK(m.trace() == 0.0);

    Mat3 e;
    e(0, 0) = 1;
    e(1, 1) = 1;
    e(2, 2) = -1;
    SymMat4 md = profile_matrix_3d(e);
    CHECK(md(0, 0) == 1.0);
    CHECK(md(1, 1) == 1.0);
    CHECK(md(2, 2) == 1.0);
    CHECK(md(3, 3) == -3.0);

    CHECK(profile_matrix_3d(Mat3{}).frobenius() == 0.0);

    Rng rng(35);
    for (int i = 0; i < 500; ++i) {
        Mat3 r;
        for (double& v : r.a) v = rng.uniform_sym(2.0);
        CHECK(profile_matrix_3d(r).trace() == 0.0);
    }
}

TEST_CASE("match3d recovers exact rotations")
{
    Rng rng(36);
    PointCloud x = random_cloud(3, 20, rng);
    Match3Result self = match3d(x, x);
    CHECK(quat_distance_up_to_sign(self.q_opt, {1, 0, 0, 0}) < 1e-10);
    CHECK(self.lambda_opt == doctest::Approx(exact_data_eigenvalue(x)).epsilon(1e-10));

    for (int i = 0; i < 200; ++i) {
        Quaternion q = random_unit_quaternion(rng);
        PointCloud u = rotate3(rot3_from_quat(q), x);
        Match3Result r = match3d(x, u);
        CHECK(quat_distance_up_to_sign(r.q_opt, q) < 1e-10);
        CHECK(r.loss <= 1e-18 * exact_data_eigenvalue(x));
        CHECK((r.r_opt.matrix() - rot3_from_quat(q).matrix()).max_abs() < 1e-9);
    }
}

TEST_CASE("match3d outperforms the generator on noisy data")
{
    Rng rng(37);
    for (int i = 0; i < 100; ++i) {
        PointCloud x = random_cloud(3, 30, rng);
        Quaternion q = random_unit_quaternion(rng);
        PointCloud u = rotate3(rot3_from_quat(q), x);
        for (double& v : u.data()) v += 0.1 * rng.normal();
        Match3Result r = match3d(x, u);
        CHECK(r.loss <= match_loss(rot3_from_quat(q).matrix(), x, u) + 1e-12);
    }
}

TEST_CASE("match3d reports the loss it achieved")
{
    Rng rng(38);
    for (int i = 0; i < 100; ++i) {
        PointCloud x = random_cloud(3, 15, rng);
        Quaternion q = random_unit_quaternion(rng);
        PointCloud u = rotate3(rot3_from_quat(q), x);
        for (double& v : u.data()) v += 0.05 * rng.normal();
        Match3Result r = match3d(x, u);
        double independent = brute_force_loss3(r.r_opt.matrix(), x, u);
        CHECK(std::abs(r.loss - independent) <= 1e-12 * (1.0 + independent));
    }
}

TEST_CASE("match3d rejects mirror-symmetric data")
{
    // u is x with the z axis reflected: E = diag(1,1,-1), triple maximal eigenvalue
    PointCloud x(3, 3), u(3, 3);
    x.at(0, 0) = 1;
    x.at(1, 1) = 1;
    x.at(2, 2) = 1;
    u = x;
    u.at(2, 2) = -1;
    CHECK_THROWS_AS(match3d(x, u), DegenerateAdjugate);
}

TEST_CASE("eigenvalue spectrum is rotation invariant on exact data")
{
    Rng rng(39);
    for (int i = 0; i < 100; ++i) {
        PointCloud x = random_cloud(3, 12, rng);
        Quaternion q = random_unit_quaternion(rng);
        PointCloud u = rotate3(rot3_from_quat(q), x);

        Mat3 e = cross_covariance(x, u).to_mat3();
        Mat3 e0 = cross_covariance(x, x).to_mat3();
        QuarticRoots a = eigenvalues_sym4(profile_matrix_3d(e));
        QuarticRoots b = eigenvalues_sym4(profile_matrix_3d(e0));
        for (int j = 0; j < 4; ++j)
            CHECK(std::abs(a.roots[j] - b.roots[j]) <= 1e-9 * (1.0 + std::abs(b.roots[j])));
    }
}

TEST_CASE("exact_data_eigenvalue")
{
    PointCloud p(3, 1);
    p.at(0, 0) = 1;
    p.at(0, 1) = 2;
    p.at(0, 2) = 2;
    CHECK(exact_data_eigenvalue(p) == 9.0);

    PointCloud zero(3, 1);
    CHECK(exact_data_eigenvalue(zero) == 0.0);

    Rng rng(40);
    for (int i = 0; i < 100; ++i) {
        PointCloud x = random_cloud(3, 10, rng);
        Mat3 e0 = cross_covariance(x, x).to_mat3();
        double lam = max_eigenvalue_sym4(profile_matrix_3d(e0));
        double want = exact_data_eigenvalue(x);
        CHECK(std::abs(lam - want) <= 1e-10 * (1.0 + want));
    }
}
