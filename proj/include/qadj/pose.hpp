#pragma once

#include <optional>

#include "qadj/extract.hpp"
#include "qadj/match.hpp"

namespace qadj {

// 2x2 subdeterminants of the 3x3 cross-covariance array of ([x,y], [u]).
// d1 is the Gram determinant of the 2D reference cloud.
struct CovDet2 {
    double d1 = 0.0, d2 = 0.0, d3 = 0.0;
};

// The ten 3x3 subdeterminants of the 5x5 cross-covariance array of
// ([x,y,z], [u,v]); d1 is the Gram determinant of the reference cloud.
struct CovDet3 {
    std::array<double, 10> d{}; // d[0] = d1, ..., d[9] = d10
    double operator[](int i) const { return d[std::size_t(i - 1)]; } // 1-indexed
};

// Perspective camera conventions.  CloudAtOrigin: camera at (0,0,1/fbar)
// looking at a cloud centered on the origin; denominators 1 - fbar * depth;
// fbar = 0 is the orthographic limit.  CameraAtOrigin: pinhole at the origin,
// image plane z = f, denominators are the depths themselves.
struct CameraConvention {
    enum class Kind { cloud_at_origin, camera_at_origin };
    Kind kind = Kind::cloud_at_origin;
    double value = 0.0; // fbar (>= 0) or f (> 0)

    static CameraConvention cloud_at_origin(double fbar);
    static CameraConvention camera_at_origin(double f);
};

struct PoseSolution {
    Mat3 r_tilde;                  // raw least-squares matrix, not necessarily a rotation
    Quaternion q_opt;              // Bar-Itzhack corrected quaternion
    Rotation3 r_bi = rot3_from_quat(Quaternion{});
    double loss_raw = 0.0;         // loss of r_tilde (top two rows)
    double loss_bi = 0.0;          // loss of r_bi
    std::optional<double> focal;   // perspective pipeline only (f or fbar)
    AdjugateMatrix4 adjugate;      // adjugate of the Bar-Itzhack characteristic matrix
};

struct Pose2Result {
    double alpha = 0.0, beta = 0.0, gamma = 0.0;
    Rotation2 r = rot2_from_angle(0.0);
    double loss = 0.0;
    CovDet2 dets;
};

struct OrthoRawResult {
    Mat3 r_tilde;
    SymMat4 adjugate_vars; // the reverse-engineered clean adjugate, 10 scalars
    CovDet3 dets;
};

// u_k = top two rows of r times x_k.
PointCloud ortho_project(const Rotation3& r, const PointCloud& x);

// sum_k |P x_k - u_k|^2 with P the top two rows of r; accepts non-rotations.
double ortho_pose_loss(const Mat3& r, const PointCloud& x, const PointCloud& u);

// sum_k (p . x_k - u_k)^2 for a 1x2 projection row p against a 1D image.
double pose2d_loss(const std::array<double, 2>& p, const PointCloud& x, const PointCloud& u);

CovDet2 cov_determinants2(const PointCloud& x, const PointCloud& u);

// Closed-form 2D pose: alpha = (1 + d2/d1)/2, beta = (1 - d2/d1)/2,
// gamma = d3/(2 d1); rotation [[d2,-d3],[d3,d2]] / hypot(d2,d3).
// Throws DegenerateReference (collinear reference) and AmbiguousPose.
Pose2Result pose2d(const PointCloud& x, const PointCloud& u);

CovDet3 cov_determinants3(const PointCloud& x, const PointCloud& u);

// Raw closed-form 3D orthographic pose: rows of r_tilde are
// (d7,-d4,d2)/d1, (d8,-d5,d3)/d1, (d6,d9,d10)/d1, plus the clean adjugate
// variables.  Throws DegenerateReference when d1 is small against (tr G)^3.
OrthoRawResult pose3d_ortho_raw(const PointCloud& x, const PointCloud& u);

// Raw solve followed by the Bar-Itzhack correction: profile of r_tilde built
// directly from d1..d10, maximal eigenvalue, adjugate, row normalization.
PoseSolution pose3d_ortho(const PointCloud& x, const PointCloud& u);

// Perspective projection of a 3D cloud under either camera convention.
// Throws CameraInsideCloud when a depth denominator is near zero or changes
// sign across the cloud.
PointCloud perspective_project(const Rotation3& r, const CameraConvention& cam,
                               const PointCloud& x);

double perspective_loss(const Mat3& r, const CameraConvention& cam, const PointCloud& x,
                        const PointCloud& u);

// Focal recovery for a fixed rotation.  CameraAtOrigin: the closed form
// sum((u x' + v y')/z') / sum((x'^2 + y'^2)/z'^2).  CloudAtOrigin: root of
// dS/dfbar = 0 by scan + bisection + Newton polish inside [bracket_lo,
// bracket_hi] (auto-scanned when omitted); several roots resolve to least
// loss, then smaller fbar.
double solve_focal_length(const Rotation3& r, CameraConvention::Kind kind, const PointCloud& x,
                          const PointCloud& u,
                          std::optional<std::pair<double, double>> bracket = std::nullopt);

// Three-step perspective pose: orthographic raw solve, Bar-Itzhack
// correction, focal length as a separate optimization.  Loss fields hold the
// perspective losses of (r_tilde, focal) and (r_bi, focal).  refine_iterations
// re-runs the steps against a perspective-corrected image.
PoseSolution pose3d_perspective(const PointCloud& x, const PointCloud& u,
                                CameraConvention::Kind kind, int refine_iterations = 0);

// 2 arccos(|q_a . q_b|): double cover folded, never above pi.
double rotation_error(const Quaternion& q_a, const Quaternion& q_b);

// The raw signed variant 2 arccos(q_a . q_b).
double rotation_error_signed(const Quaternion& q_a, const Quaternion& q_b);

} // namespace qadj
