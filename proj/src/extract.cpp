#include "qadj/extract.hpp"

#include <cmath>

namespace qadj {

namespace {

SectorId sector_from_flags(const std::array<bool, 4>& zero)
{
    SectorId s;
    s.zero = zero;
    switch (s.zero_count()) {
        case 1: s.cls = SectorClass::one_zero; break;
        case 2: s.cls = SectorClass::two_zero; break;
        case 3: s.cls = SectorClass::three_zero; break;
        default: s.cls = SectorClass::generic; break;
    }
    return s;
}

} // namespace

AdjugateMatrix4 trace_normalized_adjugate(const SymMat4& raw)
{
    double tr = raw.trace();
    double fro = raw.frobenius();
    if (std::abs(tr) <= 1e-14 * (1.0 + fro))
        throw DegenerateAdjugate("trace_normalized_adjugate: adjugate trace vanished");
    double s = 1.0 / tr; // negative trace flips the overall sign too
    SymMat4 n;
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = i; j < 4; ++j) n.set(i, j, raw(i, j) * s);
    for (std::size_t i = 0; i < 4; ++i)
        if (n(i, i) < 0.0 && n(i, i) > -1e-12) n.set(i, i, 0.0);
    AdjugateMatrix4 out;
    out.m = n;
    out.scale = std::abs(tr);
    return out;
}

AdjugateMatrix4 quadratic_form_matrix(const Quaternion& q)
{
    if (std::abs(q.dot(q) - 1.0) > 1e-9) throw NotUnit("quadratic_form_matrix: quaternion not unit");
    const std::array<double, 4> c = q.as_array();
    SymMat4 m;
    for (std::size_t i = 0; i < 4; ++i)
        for (std::size_t j = i; j < 4; ++j) m.set(i, j, c[i] * c[j]);
    AdjugateMatrix4 out;
    out.m = m;
    out.scale = 1.0;
    return out;
}

RowNormalization normalize_adjugate_row(const AdjugateMatrix4& adj, double tol)
{
    auto diag = adj.diagonal();
    double tr = adj.m.trace();
    if (!(tr > 0.0)) throw DegenerateAdjugate("normalize_adjugate_row: non-positive trace");

    std::size_t k = 0;
    for (std::size_t i = 1; i < 4; ++i)
        if (diag[i] > diag[k] + 1e-12 * tr) k = i; // ties resolve to the lowest index

    if (diag[k] <= tol * tr)
        throw DegenerateAdjugate("normalize_adjugate_row: all diagonals below threshold");

    double inv = 1.0 / std::sqrt(diag[k]);
    Quaternion q{adj(k, 0) * inv, adj(k, 1) * inv, adj(k, 2) * inv, adj(k, 3) * inv};
    q = q.normalized().canonicalized();

    std::array<bool, 4> zero{};
    for (std::size_t i = 0; i < 4; ++i) zero[i] = diag[i] < tol * tr;
    return RowNormalization{q, sector_from_flags(zero), k};
}

AdjugateMatrix4 extract_quat3_exact(const AxisAngle& aa)
{
    double c = std::cos(aa.theta), s = std::sin(aa.theta);
    const auto& n = aa.axis;
    SymMat4 m;
    m.set(0, 0, 0.5 * (1.0 + c));
    for (std::size_t i = 0; i < 3; ++i) m.set(0, i + 1, 0.5 * s * n[i]);
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = i; j < 3; ++j) m.set(i + 1, j + 1, 0.5 * (1.0 - c) * n[i] * n[j]);
    AdjugateMatrix4 out;
    out.m = m;
    out.scale = 1.0;
    return out;
}

SymMat4 profile_from_rot3_measured(const Mat3& m)
{
    if (!m.finite()) throw InvalidArgument("profile_from_rot3_measured: non-finite entry");
    SymMat4 k;
    double d0 = m(0, 0) + m(1, 1) + m(2, 2);
    double d1 = m(0, 0) - m(1, 1) - m(2, 2);
    double d2 = -m(0, 0) + m(1, 1) - m(2, 2);
    k.set(0, 0, d0);
    k.set(1, 1, d1);
    k.set(2, 2, d2);
    k.set(3, 3, -(d0 + d1 + d2)); // symbolically -m11-m22+m33; keeps the trace exactly zero
    k.set(0, 1, m(2, 1) - m(1, 2));
    k.set(0, 2, m(0, 2) - m(2, 0));
    k.set(0, 3, m(1, 0) - m(0, 1));
    k.set(1, 2, m(0, 1) + m(1, 0));
    k.set(1, 3, m(0, 2) + m(2, 0));
    k.set(2, 3, m(1, 2) + m(2, 1));
    return k;
}

ExtractionResult extract_quat3_noisy(const Mat3& m)
{
    SymMat4 k0 = profile_from_rot3_measured(m);
    double lambda = max_eigenvalue_sym4(k0);
    SymMat4 chi = char_matrix(k0, lambda);
    Mat4 adj = adjugate(chi.to_mat());

    double chi_fro = chi.frobenius();
    double adj_tr = adj(0, 0) + adj(1, 1) + adj(2, 2) + adj(3, 3);
    if (std::abs(adj_tr) < 1e-14 * chi_fro * chi_fro * chi_fro)
        throw DegenerateAdjugate("extract_quat3_noisy: repeated maximal eigenvalue");

    ExtractionResult res;
    res.adjugate = trace_normalized_adjugate(SymMat4::from_mat(adj));
    res.lambda_opt = lambda;
    RowNormalization rn = normalize_adjugate_row(res.adjugate);
    res.chosen_row = rn.row;
    res.q_opt = rn.q;
    res.r_opt = rot3_from_quat(res.q_opt);
    res.frobenius_residual = (res.r_opt.matrix() - m).frobenius();
    return res;
}

Adjugate2 extract_quat2_exact(double c, double s)
{
    if (!std::isfinite(c) || !std::isfinite(s)) throw InvalidArgument("extract_quat2_exact: non-finite");
    if (std::abs(c * c + s * s - 1.0) > 1e-9) throw NotOnCircle("extract_quat2_exact: (c,s) off the unit circle");
    Adjugate2 a;
    a.alpha = 0.5 * (1.0 + c);
    a.beta = 0.5 * (1.0 - c);
    a.gamma = 0.5 * s;
    a.scale = 1.0;
    return a;
}

Extraction2Result extract_quat2_noisy(const Mat2& m)
{
    if (!m.finite()) throw InvalidArgument("extract_quat2_noisy: non-finite entry");
    double d = 0.5 * (m(0, 0) + m(1, 1));
    double t = 0.5 * (m(1, 0) - m(0, 1));
    double lambda = std::hypot(d, t);
    if (lambda <= 1e-14)
        throw DegenerateInput("extract_quat2_noisy: no rotational content");

    // unnormalized eigenvector pair (lambda+d, t) and (t, lambda-d); the
    // adjugate rescaled so alpha + beta = 1
    Adjugate2 a;
    a.alpha = 0.5 * (lambda + d) / lambda;
    a.beta = 0.5 * (lambda - d) / lambda;
    a.gamma = 0.5 * t / lambda;
    a.scale = 2.0 * lambda;

    Quat2 q = (a.alpha >= a.beta)
                  ? Quat2{std::sqrt(a.alpha), a.gamma / std::sqrt(a.alpha)}.normalized()
                  : Quat2{a.gamma / std::sqrt(a.beta), std::sqrt(a.beta)}.normalized();
    if (q.a < 0.0 || (q.a == 0.0 && q.b < 0.0)) q = Quat2{-q.a, -q.b};
    return Extraction2Result{a, lambda, q};
}

SectorId classify_singular_sector(const Quaternion& q, double tol)
{
    if (std::abs(q.dot(q) - 1.0) > 1e-9) throw NotUnit("classify_singular_sector: quaternion not unit");
    const std::array<double, 4> c = q.as_array();
    std::array<bool, 4> zero{};
    for (std::size_t i = 0; i < 4; ++i) zero[i] = std::abs(c[i]) < tol;
    return sector_from_flags(zero);
}

} // namespace qadj
