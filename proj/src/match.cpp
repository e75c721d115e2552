#include "qadj/match.hpp"

#include <cmath>

namespace qadj {

PointCloud::PointCloud(int dim, std::size_t count)
    : dim_(dim), count_(count), data_(count * std::size_t(dim), 0.0)
{
    if (dim < 1 || dim > 3) throw DimensionError("PointCloud: dim must be 1, 2 or 3");
    if (count < 1) throw InvalidArgument("PointCloud: need at least one point");
}

PointCloud PointCloud::from_rows(int dim, const std::vector<double>& point_major)
{
    if (dim < 1 || dim > 3) throw DimensionError("PointCloud: dim must be 1, 2 or 3");
    if (point_major.empty() || point_major.size() % std::size_t(dim) != 0)
        throw ShapeMismatch("PointCloud: data size not a multiple of dim");
    PointCloud c(dim, point_major.size() / std::size_t(dim));
    c.data_ = point_major;
    c.validate();
    return c;
}

void PointCloud::validate() const
{
    ensure_finite(data_.data(), data_.size(), "PointCloud");
}

Mat3 CrossCov::to_mat3() const
{
    if (rows != 3 || cols != 3) throw ShapeMismatch("CrossCov: not 3x3");
    Mat3 m;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c) m(r, c) = (*this)(r, c);
    return m;
}

Mat2 CrossCov::to_mat2() const
{
    if (rows != 2 || cols != 2) throw ShapeMismatch("CrossCov: not 2x2");
    Mat2 m;
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c) m(r, c) = (*this)(r, c);
    return m;
}

CrossCov cross_covariance(const PointCloud& x, const PointCloud& u)
{
    if (x.count() != u.count()) throw ShapeMismatch("cross_covariance: point counts differ");
    const int dx = x.dim(), du = u.dim();
    const bool shape_ok = (dx == 2 && du == 2) || (dx == 3 && du == 3)
                       || (dx == 3 && du == 2) || (dx == 2 && du == 1);
    if (!shape_ok) throw ShapeMismatch("cross_covariance: unsupported dimension pair");
    CrossCov cc;
    cc.rows = dx;
    cc.cols = du;
    for (std::size_t k = 0; k < x.count(); ++k)
        for (int r = 0; r < dx; ++r)
            for (int c = 0; c < du; ++c) cc(r, c) += x.at(k, r) * u.at(k, c);
    return cc;
}

double match_loss(const Mat2& r, const PointCloud& x, const PointCloud& u)
{
    if (x.count() != u.count() || x.dim() != 2 || u.dim() != 2)
        throw ShapeMismatch("match_loss: expected paired 2D clouds");
    double s = 0.0;
    for (std::size_t k = 0; k < x.count(); ++k) {
        double px = r(0, 0) * x.at(k, 0) + r(0, 1) * x.at(k, 1) - u.at(k, 0);
        double py = r(1, 0) * x.at(k, 0) + r(1, 1) * x.at(k, 1) - u.at(k, 1);
        s += px * px + py * py;
    }
    return s;
}

double match_loss(const Mat3& r, const PointCloud& x, const PointCloud& u)
{
    if (x.count() != u.count() || x.dim() != 3 || u.dim() != 3)
        throw ShapeMismatch("match_loss: expected paired 3D clouds");
    double s = 0.0;
    for (std::size_t k = 0; k < x.count(); ++k) {
        for (int i = 0; i < 3; ++i) {
            double p = r(i, 0) * x.at(k, 0) + r(i, 1) * x.at(k, 1) + r(i, 2) * x.at(k, 2)
                     - u.at(k, i);
            s += p * p;
        }
    }
    return s;
}

Match2Result match2d(const PointCloud& x, const PointCloud& u)
{
    if (x.dim() != 2 || u.dim() != 2) throw ShapeMismatch("match2d: expected 2D clouds");
    if (x.count() != u.count()) throw ShapeMismatch("match2d: point counts differ");
    if (x.count() < 2) throw InvalidArgument("match2d: need K >= 2");

    CrossCov e = cross_covariance(x, u);
    double xu = e(0, 0), xv = e(0, 1), yu = e(1, 0), yv = e(1, 1);
    double diag = xu + yv, skew = xv - yu;
    double lambda = std::hypot(diag, skew);

    double xn = 0.0, un = 0.0;
    for (std::size_t k = 0; k < x.count(); ++k) {
        xn += x.at(k, 0) * x.at(k, 0) + x.at(k, 1) * x.at(k, 1);
        un += u.at(k, 0) * u.at(k, 0) + u.at(k, 1) * u.at(k, 1);
    }
    if (lambda <= 1e-14 * std::sqrt(xn) * std::sqrt(un))
        throw DegenerateData("match2d: rotationally ambiguous data");

    Match2Result res;
    res.adjugate.alpha = 0.5 * (1.0 + diag / lambda);
    res.adjugate.beta = 0.5 * (1.0 - diag / lambda);
    res.adjugate.gamma = 0.5 * skew / lambda;
    res.adjugate.scale = lambda;
    res.lambda_opt = lambda;

    Mat2 rm;
    rm(0, 0) = diag / lambda;
    rm(0, 1) = -skew / lambda;
    rm(1, 0) = skew / lambda;
    rm(1, 1) = diag / lambda;
    res.r_opt = Rotation2::exact(rm);

    const Adjugate2& a = res.adjugate;
    Quat2 q = (a.alpha >= a.beta)
                  ? Quat2{std::sqrt(a.alpha), a.gamma / std::sqrt(a.alpha)}.normalized()
                  : Quat2{a.gamma / std::sqrt(a.beta), std::sqrt(a.beta)}.normalized();
    if (q.a < 0.0 || (q.a == 0.0 && q.b < 0.0)) q = Quat2{-q.a, -q.b};
    res.q_opt = q;

    res.loss = match_loss(rm, x, u);
    return res;
}

SymMat4 profile_matrix_3d(const Mat3& e)
{
    if (!e.finite()) throw InvalidArgument("profile_matrix_3d: non-finite entry");
    SymMat4 m;
    double d0 = e(0, 0) + e(1, 1) + e(2, 2);
    double d1 = e(0, 0) - e(1, 1) - e(2, 2);
    double d2 = -e(0, 0) + e(1, 1) - e(2, 2);
    m.set(0, 0, d0);
    m.set(1, 1, d1);
    m.set(2, 2, d2);
    m.set(3, 3, -(d0 + d1 + d2));
    m.set(0, 1, e(1, 2) - e(2, 1));
    m.set(0, 2, e(2, 0) - e(0, 2));
    m.set(0, 3, e(0, 1) - e(1, 0));
    m.set(1, 2, e(0, 1) + e(1, 0));
    m.set(1, 3, e(2, 0) + e(0, 2));
    m.set(2, 3, e(1, 2) + e(2, 1));
    return m;
}

Match3Result match3d(const PointCloud& x, const PointCloud& u)
{
    if (x.dim() != 3 || u.dim() != 3) throw ShapeMismatch("match3d: expected 3D clouds");
    if (x.count() != u.count()) throw ShapeMismatch("match3d: point counts differ");

    Mat3 e = cross_covariance(x, u).to_mat3();
    SymMat4 profile = profile_matrix_3d(e);
    double lambda = max_eigenvalue_sym4(profile);
    SymMat4 chi = char_matrix(profile, lambda);
    Mat4 adj = adjugate(chi.to_mat());

    double chi_fro = chi.frobenius();
    double adj_tr = adj(0, 0) + adj(1, 1) + adj(2, 2) + adj(3, 3);
    if (std::abs(adj_tr) < 1e-14 * chi_fro * chi_fro * chi_fro)
        throw DegenerateAdjugate("match3d: repeated maximal eigenvalue (symmetric data)");

    Match3Result res;
    res.adjugate = trace_normalized_adjugate(SymMat4::from_mat(adj));
    res.lambda_opt = lambda;
    res.q_opt = normalize_adjugate_row(res.adjugate).q;
    res.r_opt = rot3_from_quat(res.q_opt);
    res.loss = match_loss(res.r_opt.matrix(), x, u);
    return res;
}

double exact_data_eigenvalue(const PointCloud& x)
{
    double s = 0.0;
    for (std::size_t k = 0; k < x.count(); ++k)
        for (int d = 0; d < x.dim(); ++d) s += x.at(k, d) * x.at(k, d);
    return s;
}

} // namespace qadj
