#pragma once

#include <array>
#include <cstdint>

#include "qadj/linalg.hpp"
#include "qadj/rotations.hpp"

namespace qadj {

// Symmetric 2x2 carrier of the unnormalized half-angle pair:
// (alpha, gamma; gamma, beta) ~ (a^2, ab; ab, b^2), rescaled to
// alpha + beta = 1.  `scale` is the positive factor divided out.
struct Adjugate2 {
    double alpha = 1.0, beta = 0.0, gamma = 0.0;
    double scale = 1.0;
};

// Symmetric 4x4 carrier of the ten unnormalized quadratic products q_i q_j,
// rescaled to unit trace (sign flipped first if the trace came out negative).
// Tiny negative diagonals from round-off are clamped at zero.
struct AdjugateMatrix4 {
    SymMat4 m;          // trace-normalized entries
    double scale = 1.0; // |trace| divided out

    double operator()(std::size_t i, std::size_t j) const { return m(i, j); }
    std::array<double, 4> diagonal() const { return {m(0, 0), m(1, 1), m(2, 2), m(3, 3)}; }
};

enum class SectorClass : std::uint8_t { generic, one_zero, two_zero, three_zero };

// Which quaternion components sit below the classification threshold.
struct SectorId {
    std::array<bool, 4> zero{};
    SectorClass cls = SectorClass::generic;

    int zero_count() const { return int(zero[0]) + int(zero[1]) + int(zero[2]) + int(zero[3]); }
};

struct ExtractionResult {
    AdjugateMatrix4 adjugate;
    double lambda_opt = 0.0;
    std::size_t chosen_row = 0;
    Quaternion q_opt;
    Rotation3 r_opt = rot3_from_quat(Quaternion{});
    double frobenius_residual = 0.0;
};

struct Extraction2Result {
    Adjugate2 adjugate;
    double lambda = 0.0;
    Quat2 q;
};

// Exact outer product q q^T (trace 1).  Throws NotUnit.
AdjugateMatrix4 quadratic_form_matrix(const Quaternion& q);

// Rescales a raw q q^T-structured matrix to unit trace, flipping the overall
// sign first when the trace is negative, and clamps round-off negatives on
// the diagonal.  Throws DegenerateAdjugate when the trace vanishes.
AdjugateMatrix4 trace_normalized_adjugate(const SymMat4& raw);

// Picks the row with the maximal diagonal (ties: lowest index), divides by
// sqrt of that diagonal, and canonicalizes the sign.  SectorId reports which
// diagonals fell below tol * trace.  Throws DegenerateAdjugate when every
// diagonal is below threshold (corrupt input; cannot happen for rank-1).
struct RowNormalization {
    Quaternion q;
    SectorId sector;
    std::size_t row = 0;
};
RowNormalization normalize_adjugate_row(const AdjugateMatrix4& adj, double tol = 1e-7);

// The half-angle quadratic-form matrix built directly from axis-angle data,
// 1/2 [1+c, s n; s n, (1-c) n n^T].  Agrees with
// quadratic_form_matrix(quat_from_axis_angle(aa)) to round-off.
AdjugateMatrix4 extract_quat3_exact(const AxisAngle& aa);

// Bar-Itzhack profile K0(m) of a measured 3x3 matrix; traceless by
// construction (the last diagonal entry balances the first three exactly).
SymMat4 profile_from_rot3_measured(const Mat3& m);

// Full noisy-data extraction: K0(m) -> lambda_opt -> adjugate of the
// characteristic matrix -> row choice -> q_opt and R_opt = R(q_opt).
// Throws DegenerateAdjugate when the adjugate trace collapses (repeated
// maximal eigenvalue), and propagates NonConvergence.
ExtractionResult extract_quat3_noisy(const Mat3& m);

// 2D exact-data adjugate: alpha = (1+c)/2, beta = (1-c)/2, gamma = s/2.
// Throws NotOnCircle when |c^2 + s^2 - 1| > 1e-9.
Adjugate2 extract_quat2_exact(double c, double s);

// 2D noisy-data extraction from a measured 2x2 matrix via
// d = (m11+m22)/2, t = (m21-m12)/2, lambda = sqrt(d^2+t^2).
// Throws DegenerateInput when lambda <= 1e-14 (no rotational content).
Extraction2Result extract_quat2_noisy(const Mat2& m);

// Components with |q_i| < tol are marked zero; class follows the count.
SectorId classify_singular_sector(const Quaternion& q, double tol = 1e-7);

} // namespace qadj
