#include "qadj/pose.hpp"

#include <algorithm>
#include <cmath>
#include <tuple>
#include <vector>

namespace qadj {

namespace {

std::array<double, 3> rotate_point(const Mat3& r, const PointCloud& x, std::size_t k)
{
    return {r(0, 0) * x.at(k, 0) + r(0, 1) * x.at(k, 1) + r(0, 2) * x.at(k, 2),
            r(1, 0) * x.at(k, 0) + r(1, 1) * x.at(k, 1) + r(1, 2) * x.at(k, 2),
            r(2, 0) * x.at(k, 0) + r(2, 1) * x.at(k, 1) + r(2, 2) * x.at(k, 2)};
}

double cloud_radius(const PointCloud& x)
{
    double r = 0.0;
    for (std::size_t k = 0; k < x.count(); ++k) {
        double n = 0.0;
        for (int d = 0; d < x.dim(); ++d) n += x.at(k, d) * x.at(k, d);
        r = std::max(r, n);
    }
    return std::sqrt(r);
}

void expect_pose_shapes(const PointCloud& x, const PointCloud& u, int dx, int du, const char* what)
{
    if (x.dim() != dx || u.dim() != du)
        throw ShapeMismatch(std::string(what) + ": unexpected cloud dimensions");
    if (x.count() != u.count())
        throw ShapeMismatch(std::string(what) + ": point counts differ");
}

// Per-point perspective denominators; throws when one is near zero or the
// sign flips across the cloud.
std::vector<double> perspective_denominators(const Mat3& r, const CameraConvention& cam,
                                             const PointCloud& x, const char* what)
{
    std::vector<double> den(x.count());
    double guard = 1e-9 * cloud_radius(x);
    bool pos = false, neg = false;
    for (std::size_t k = 0; k < x.count(); ++k) {
        double z = r(2, 0) * x.at(k, 0) + r(2, 1) * x.at(k, 1) + r(2, 2) * x.at(k, 2);
        double d = (cam.kind == CameraConvention::Kind::cloud_at_origin) ? 1.0 - cam.value * z : z;
        if (std::abs(d) <= guard)
            throw CameraInsideCloud(std::string(what) + ": depth denominator near zero");
        (d > 0.0 ? pos : neg) = true;
        den[k] = d;
    }
    if (pos && neg)
        throw CameraInsideCloud(std::string(what) + ": depth denominator changes sign");
    return den;
}

} // namespace

CameraConvention CameraConvention::cloud_at_origin(double fbar)
{
    if (!(fbar >= 0.0) || !std::isfinite(fbar))
        throw InvalidArgument("CameraConvention: fbar must be >= 0");
    return {Kind::cloud_at_origin, fbar};
}

CameraConvention CameraConvention::camera_at_origin(double f)
{
    if (!(f > 0.0) || !std::isfinite(f))
        throw InvalidArgument("CameraConvention: f must be > 0");
    return {Kind::camera_at_origin, f};
}

PointCloud ortho_project(const Rotation3& r, const PointCloud& x)
{
    if (x.dim() != 3) throw ShapeMismatch("ortho_project: expected a 3D cloud");
    PointCloud u(2, x.count());
    for (std::size_t k = 0; k < x.count(); ++k) {
        auto p = rotate_point(r.matrix(), x, k);
        u.at(k, 0) = p[0];
        u.at(k, 1) = p[1];
    }
    return u;
}

double ortho_pose_loss(const Mat3& r, const PointCloud& x, const PointCloud& u)
{
    expect_pose_shapes(x, u, 3, 2, "ortho_pose_loss");
    double s = 0.0;
    for (std::size_t k = 0; k < x.count(); ++k) {
        auto p = rotate_point(r, x, k);
        double ex = p[0] - u.at(k, 0);
        double ey = p[1] - u.at(k, 1);
        s += ex * ex + ey * ey;
    }
    return s;
}

double pose2d_loss(const std::array<double, 2>& p, const PointCloud& x, const PointCloud& u)
{
    expect_pose_shapes(x, u, 2, 1, "pose2d_loss");
    double s = 0.0;
    for (std::size_t k = 0; k < x.count(); ++k) {
        double e = p[0] * x.at(k, 0) + p[1] * x.at(k, 1) - u.at(k, 0);
        s += e * e;
    }
    return s;
}

CovDet2 cov_determinants2(const PointCloud& x, const PointCloud& u)
{
    expect_pose_shapes(x, u, 2, 1, "cov_determinants2");
    double xx = 0, xy = 0, yy = 0, ux = 0, uy = 0;
    for (std::size_t k = 0; k < x.count(); ++k) {
        double xk = x.at(k, 0), yk = x.at(k, 1), uk = u.at(k, 0);
        xx += xk * xk;
        xy += xk * yk;
        yy += yk * yk;
        ux += uk * xk;
        uy += uk * yk;
    }
    CovDet2 d;
    d.d1 = xx * yy - xy * xy;
    d.d2 = ux * yy - uy * xy;
    d.d3 = ux * xy - uy * xx;
    return d;
}

Pose2Result pose2d(const PointCloud& x, const PointCloud& u)
{
    if (x.count() < 2) throw InvalidArgument("pose2d: need K >= 2");
    CovDet2 d = cov_determinants2(x, u);

    double xx = 0, yy = 0;
    for (std::size_t k = 0; k < x.count(); ++k) {
        xx += x.at(k, 0) * x.at(k, 0);
        yy += x.at(k, 1) * x.at(k, 1);
    }
    double tr = xx + yy;
    if (d.d1 <= 1e-14 * tr * tr)
        throw DegenerateReference("pose2d: collinear reference cloud");
    double nrm = std::hypot(d.d2, d.d3);
    if (nrm <= 1e-14 * d.d1)
        throw AmbiguousPose("pose2d: projection direction undetermined");

    Pose2Result res;
    res.dets = d;
    res.alpha = 0.5 * (1.0 + d.d2 / d.d1);
    res.beta = 0.5 * (1.0 - d.d2 / d.d1);
    res.gamma = 0.5 * d.d3 / d.d1;

    Mat2 rm;
    rm(0, 0) = d.d2 / nrm;
    rm(0, 1) = -d.d3 / nrm;
    rm(1, 0) = d.d3 / nrm;
    rm(1, 1) = d.d2 / nrm;
    res.r = Rotation2::exact(rm);
    res.loss = pose2d_loss({rm(0, 0), rm(0, 1)}, x, u);
    return res;
}

CovDet3 cov_determinants3(const PointCloud& x, const PointCloud& u)
{
    expect_pose_shapes(x, u, 3, 2, "cov_determinants3");

    // 5x5 term-by-term cross-covariance of (x, y, z, u, v)
    Mat5 c;
    for (std::size_t k = 0; k < x.count(); ++k) {
        const std::array<double, 5> p = {x.at(k, 0), x.at(k, 1), x.at(k, 2), u.at(k, 0),
                                         u.at(k, 1)};
        for (std::size_t i = 0; i < 5; ++i)
            for (std::size_t j = i; j < 5; ++j) c(i, j) += p[i] * p[j];
    }
    for (std::size_t i = 0; i < 5; ++i)
        for (std::size_t j = 0; j < i; ++j) c(i, j) = c(j, i);

    // column triples of the (x,y,z)-row block, in d1..d10 order
    static constexpr std::array<std::array<std::size_t, 3>, 10> cols = {{
        {0, 1, 2}, {0, 1, 3}, {0, 1, 4}, {0, 2, 3}, {0, 2, 4},
        {0, 3, 4}, {1, 2, 3}, {1, 2, 4}, {1, 3, 4}, {2, 3, 4},
    }};
    CovDet3 d;
    for (std::size_t i = 0; i < 10; ++i) d.d[i] = sub3det(c, {0, 1, 2}, cols[i]);
    return d;
}

namespace {

double gram_trace(const PointCloud& x)
{
    double t = 0.0;
    for (std::size_t k = 0; k < x.count(); ++k)
        for (int i = 0; i < 3; ++i) t += x.at(k, i) * x.at(k, i);
    return t;
}

Mat3 r_tilde_from_dets(const CovDet3& d)
{
    Mat3 r;
    r(0, 0) = d[7] / d[1];
    r(0, 1) = -d[4] / d[1];
    r(0, 2) = d[2] / d[1];
    r(1, 0) = d[8] / d[1];
    r(1, 1) = -d[5] / d[1];
    r(1, 2) = d[3] / d[1];
    r(2, 0) = d[6] / d[1];
    r(2, 1) = d[9] / d[1];
    r(2, 2) = d[10] / d[1];
    return r;
}

// Bar-Itzhack profile of r_tilde assembled directly from the subdeterminants;
// identical to profile_from_rot3_measured(r_tilde_from_dets(d)).
SymMat4 bi_profile_from_dets(const CovDet3& d)
{
    SymMat4 m;
    double s = 1.0 / d[1];
    double d0 = (d[7] - d[5] + d[10]) * s;
    double d1 = (d[7] + d[5] - d[10]) * s;
    double d2 = (-d[7] - d[5] - d[10]) * s;
    m.set(0, 0, d0);
    m.set(1, 1, d1);
    m.set(2, 2, d2);
    m.set(3, 3, -(d0 + d1 + d2));
    m.set(0, 1, (d[9] - d[3]) * s);
    m.set(0, 2, (d[2] - d[6]) * s);
    m.set(0, 3, (d[8] + d[4]) * s);
    m.set(1, 2, (d[8] - d[4]) * s);
    m.set(1, 3, (d[2] + d[6]) * s);
    m.set(2, 3, (d[3] + d[9]) * s);
    return m;
}

} // namespace

OrthoRawResult pose3d_ortho_raw(const PointCloud& x, const PointCloud& u)
{
    CovDet3 d = cov_determinants3(x, u);
    double tg = gram_trace(x);
    if (d[1] <= 1e-12 * tg * tg * tg)
        throw DegenerateReference("pose3d_ortho_raw: reference cloud has no 3D spread");

    OrthoRawResult res;
    res.dets = d;
    res.r_tilde = r_tilde_from_dets(d);

    // reverse-engineered adjugate variables of the raw solution
    double s = 1.0 / (4.0 * d[1]);
    SymMat4& a = res.adjugate_vars;
    a.set(0, 0, (d[1] + d[10] - d[5] + d[7]) * s);
    a.set(1, 1, (d[1] - d[10] + d[5] + d[7]) * s);
    a.set(2, 2, (d[1] - d[10] - d[5] - d[7]) * s);
    a.set(3, 3, (d[1] + d[10] + d[5] - d[7]) * s);
    a.set(0, 1, (d[9] - d[3]) * s);
    a.set(0, 2, (d[2] - d[6]) * s);
    a.set(0, 3, (d[4] + d[8]) * s);
    a.set(2, 3, (d[3] + d[9]) * s);
    a.set(1, 3, (d[2] + d[6]) * s);
    a.set(1, 2, (d[8] - d[4]) * s);
    return res;
}

PoseSolution pose3d_ortho(const PointCloud& x, const PointCloud& u)
{
    OrthoRawResult raw = pose3d_ortho_raw(x, u);

    SymMat4 profile = bi_profile_from_dets(raw.dets);
    double lambda = max_eigenvalue_sym4(profile);
    SymMat4 chi = char_matrix(profile, lambda);
    Mat4 adj = adjugate(chi.to_mat());

    double chi_fro = chi.frobenius();
    double adj_tr = adj(0, 0) + adj(1, 1) + adj(2, 2) + adj(3, 3);
    if (std::abs(adj_tr) < 1e-14 * chi_fro * chi_fro * chi_fro)
        throw DegenerateAdjugate("pose3d_ortho: repeated maximal eigenvalue");

    PoseSolution sol;
    sol.r_tilde = raw.r_tilde;
    sol.adjugate = trace_normalized_adjugate(SymMat4::from_mat(adj));
    sol.q_opt = normalize_adjugate_row(sol.adjugate).q;
    sol.r_bi = rot3_from_quat(sol.q_opt);
    sol.loss_raw = ortho_pose_loss(raw.r_tilde, x, u);
    sol.loss_bi = ortho_pose_loss(sol.r_bi.matrix(), x, u);
    return sol;
}

PointCloud perspective_project(const Rotation3& r, const CameraConvention& cam,
                               const PointCloud& x)
{
    if (x.dim() != 3) throw ShapeMismatch("perspective_project: expected a 3D cloud");
    auto den = perspective_denominators(r.matrix(), cam, x, "perspective_project");
    double f = (cam.kind == CameraConvention::Kind::camera_at_origin) ? cam.value : 1.0;
    PointCloud u(2, x.count());
    for (std::size_t k = 0; k < x.count(); ++k) {
        auto p = rotate_point(r.matrix(), x, k);
        u.at(k, 0) = f * p[0] / den[k];
        u.at(k, 1) = f * p[1] / den[k];
    }
    return u;
}

double perspective_loss(const Mat3& r, const CameraConvention& cam, const PointCloud& x,
                        const PointCloud& u)
{
    expect_pose_shapes(x, u, 3, 2, "perspective_loss");
    auto den = perspective_denominators(r, cam, x, "perspective_loss");
    double f = (cam.kind == CameraConvention::Kind::camera_at_origin) ? cam.value : 1.0;
    double s = 0.0;
    for (std::size_t k = 0; k < x.count(); ++k) {
        auto p = rotate_point(r, x, k);
        double ex = f * p[0] / den[k] - u.at(k, 0);
        double ey = f * p[1] / den[k] - u.at(k, 1);
        s += ex * ex + ey * ey;
    }
    return s;
}

namespace {

struct ProjectedData {
    std::vector<double> px, py, z, du, dv; // rotated coordinates and image points
};

ProjectedData project_rows(const Rotation3& r, const PointCloud& x, const PointCloud& u)
{
    ProjectedData d;
    d.px.resize(x.count());
    d.py.resize(x.count());
    d.z.resize(x.count());
    d.du.resize(x.count());
    d.dv.resize(x.count());
    for (std::size_t k = 0; k < x.count(); ++k) {
        auto p = rotate_point(r.matrix(), x, k);
        d.px[k] = p[0];
        d.py[k] = p[1];
        d.z[k] = p[2];
        d.du[k] = u.at(k, 0);
        d.dv[k] = u.at(k, 1);
    }
    return d;
}

// dS/dfbar for the cloud-at-origin loss.
double fbar_loss_derivative(const ProjectedData& d, double fbar)
{
    double g = 0.0;
    for (std::size_t k = 0; k < d.z.size(); ++k) {
        double w = 1.0 - fbar * d.z[k];
        double pp = d.px[k] * d.px[k] + d.py[k] * d.py[k];
        double up = d.du[k] * d.px[k] + d.dv[k] * d.py[k];
        g += 2.0 * d.z[k] / (w * w) * (pp / w - up);
    }
    return g;
}

double fbar_second_derivative(const ProjectedData& d, double fbar)
{
    double g = 0.0;
    for (std::size_t k = 0; k < d.z.size(); ++k) {
        double w = 1.0 - fbar * d.z[k];
        double pp = d.px[k] * d.px[k] + d.py[k] * d.py[k];
        double up = d.du[k] * d.px[k] + d.dv[k] * d.py[k];
        g += 2.0 * d.z[k] * d.z[k] / (w * w * w) * (3.0 * pp / w - 2.0 * up);
    }
    return g;
}

double fbar_loss(const ProjectedData& d, double fbar)
{
    double s = 0.0;
    for (std::size_t k = 0; k < d.z.size(); ++k) {
        double w = 1.0 - fbar * d.z[k];
        double ex = d.px[k] / w - d.du[k];
        double ey = d.py[k] / w - d.dv[k];
        s += ex * ex + ey * ey;
    }
    return s;
}

// Stationary points of S(fbar) inside [lo, hi], by scan, bisection, and a
// short Newton polish on the derivative.
std::vector<double> fbar_stationary_points(const ProjectedData& d, double lo, double hi)
{
    constexpr int kScan = 256;
    std::vector<double> roots;
    double prev_f = lo, prev_g = fbar_loss_derivative(d, lo);
    if (prev_g == 0.0) roots.push_back(lo);
    for (int i = 1; i <= kScan; ++i) {
        double f = lo + (hi - lo) * double(i) / kScan;
        double g = fbar_loss_derivative(d, f);
        if (g == 0.0) {
            roots.push_back(f);
        } else if (prev_g != 0.0 && ((prev_g < 0.0) != (g < 0.0))) {
            double a = prev_f, b = f, ga = prev_g;
            for (int it = 0; it < 80; ++it) {
                double m = 0.5 * (a + b);
                double gm = fbar_loss_derivative(d, m);
                if (gm == 0.0) {
                    a = b = m;
                    break;
                }
                if ((ga < 0.0) != (gm < 0.0)) b = m;
                else {
                    a = m;
                    ga = gm;
                }
            }
            double root = 0.5 * (a + b);
            for (int it = 0; it < 3; ++it) {
                double gr = fbar_loss_derivative(d, root);
                double gp = fbar_second_derivative(d, root);
                if (gp == 0.0) break;
                double next = root - gr / gp;
                if (!(next > a && next < b)) break;
                root = next;
            }
            roots.push_back(root);
        }
        prev_f = f;
        prev_g = g;
    }
    return roots;
}

std::pair<double, double> default_fbar_bracket(const ProjectedData& d, double radius)
{
    double zmax = 0.0;
    for (double z : d.z) zmax = std::max(zmax, z);
    double hi = (zmax > 0.0) ? 0.95 / zmax : 1e3 / std::max(radius, 1e-300);
    return {0.0, hi};
}

double pick_least_loss(const ProjectedData& d, const std::vector<double>& candidates)
{
    double best = candidates.front();
    double best_loss = fbar_loss(d, best);
    for (double rt : candidates) {
        double l = fbar_loss(d, rt);
        if (l < best_loss - 1e-15 * (1.0 + best_loss) ||
            (std::abs(l - best_loss) <= 1e-15 * (1.0 + best_loss) && rt < best)) {
            best = rt;
            best_loss = l;
        }
    }
    return best;
}

double solve_focal_camera_at_origin(const ProjectedData& d, double radius)
{
    double guard = 1e-9 * radius;
    double num = 0.0, den = 0.0;
    for (std::size_t k = 0; k < d.z.size(); ++k) {
        if (std::abs(d.z[k]) <= guard)
            throw DepthDegenerate("solve_focal_length: depth near zero");
        num += (d.du[k] * d.px[k] + d.dv[k] * d.py[k]) / d.z[k];
        den += (d.px[k] * d.px[k] + d.py[k] * d.py[k]) / (d.z[k] * d.z[k]);
    }
    if (den <= 0.0) throw DepthDegenerate("solve_focal_length: no lateral content");
    return num / den;
}

} // namespace

double solve_focal_length(const Rotation3& r, CameraConvention::Kind kind, const PointCloud& x,
                          const PointCloud& u,
                          std::optional<std::pair<double, double>> bracket)
{
    expect_pose_shapes(x, u, 3, 2, "solve_focal_length");
    ProjectedData d = project_rows(r, x, u);

    if (kind == CameraConvention::Kind::camera_at_origin)
        return solve_focal_camera_at_origin(d, cloud_radius(x));

    // cloud at origin: root of dS/dfbar inside the bracket
    double lo, hi;
    if (bracket) {
        lo = bracket->first;
        hi = bracket->second;
        if (!(hi > lo)) throw InvalidArgument("solve_focal_length: empty bracket");
    } else {
        std::tie(lo, hi) = default_fbar_bracket(d, cloud_radius(x));
    }
    std::vector<double> roots = fbar_stationary_points(d, lo, hi);
    if (roots.empty()) throw NoRootInBracket("solve_focal_length: dS/dfbar has no root in bracket");
    return pick_least_loss(d, roots);
}

namespace {

// Step 3 as a constrained minimization over the feasible focal range: with
// weak perspective and noise the loss can be monotone in fbar, in which case
// the optimum sits at a bracket endpoint rather than a stationary point.
double solve_focal_constrained(const Rotation3& r, CameraConvention::Kind kind,
                               const PointCloud& x, const PointCloud& u)
{
    ProjectedData d = project_rows(r, x, u);
    if (kind == CameraConvention::Kind::camera_at_origin)
        return solve_focal_camera_at_origin(d, cloud_radius(x));
    auto [lo, hi] = default_fbar_bracket(d, cloud_radius(x));
    std::vector<double> candidates = fbar_stationary_points(d, lo, hi);
    candidates.push_back(lo);
    candidates.push_back(hi);
    return pick_least_loss(d, candidates);
}

} // namespace

PoseSolution pose3d_perspective(const PointCloud& x, const PointCloud& u,
                                CameraConvention::Kind kind, int refine_iterations)
{
    PoseSolution sol = pose3d_ortho(x, u);
    double focal = solve_focal_constrained(sol.r_bi, kind, x, u);

    for (int it = 0; it < refine_iterations; ++it) {
        // map the image back to an orthographic target with the current model
        PointCloud target(2, u.count());
        const Mat3& rm = sol.r_bi.matrix();
        for (std::size_t k = 0; k < u.count(); ++k) {
            double z = rm(2, 0) * x.at(k, 0) + rm(2, 1) * x.at(k, 1) + rm(2, 2) * x.at(k, 2);
            double w = (kind == CameraConvention::Kind::camera_at_origin) ? z / focal
                                                                          : 1.0 - focal * z;
            target.at(k, 0) = u.at(k, 0) * w;
            target.at(k, 1) = u.at(k, 1) * w;
        }
        sol = pose3d_ortho(x, target);
        focal = solve_focal_constrained(sol.r_bi, kind, x, u);
    }

    CameraConvention cam = (kind == CameraConvention::Kind::camera_at_origin)
                               ? CameraConvention::camera_at_origin(focal)
                               : CameraConvention::cloud_at_origin(std::max(focal, 0.0));
    sol.focal = focal;
    sol.loss_raw = perspective_loss(sol.r_tilde, cam, x, u);
    sol.loss_bi = perspective_loss(sol.r_bi.matrix(), cam, x, u);
    return sol;
}

double rotation_error(const Quaternion& q_a, const Quaternion& q_b)
{
    if (std::abs(q_a.dot(q_a) - 1.0) > 1e-9 || std::abs(q_b.dot(q_b) - 1.0) > 1e-9)
        throw NotUnit("rotation_error: quaternions must be unit");
    double c = std::clamp(std::abs(q_a.dot(q_b)), 0.0, 1.0);
    return 2.0 * std::acos(c);
}

double rotation_error_signed(const Quaternion& q_a, const Quaternion& q_b)
{
    if (std::abs(q_a.dot(q_a) - 1.0) > 1e-9 || std::abs(q_b.dot(q_b) - 1.0) > 1e-9)
        throw NotUnit("rotation_error_signed: quaternions must be unit");
    double c = std::clamp(q_a.dot(q_b), -1.0, 1.0);
    return 2.0 * std::acos(c);
}

} // namespace qadj
