#pragma once

#include "crtbp/types.hpp"

#include <vector>

namespace crtbp {

/// One critical point of the effective potential with its phase-space lift.
///
/// In this frame (Moon at the origin) the lift of a planar critical point is
///   (q1, q2, 0, -q2, q1 - 1 + mu, 0),
/// the translation of the barycentric-frame lift (q1,q2,0,-q2,q1,0); the
/// completed squares of H vanish there, so H(lift) = U(q) and grad H = 0.
struct LagrangePoint {
    int index = 0;             // 1..5, ordered by critical value
    Vec3 q{0.0, 0.0, 0.0};     // position (q3 = 0)
    Vec6 phase_point{};        // lifted critical point of H
    double critical_value = 0; // c_i = H(L_i) = U(q_i)
    double grad_norm = 0;      // |grad U| residual at q
};

struct LagrangeSet {
    std::vector<LagrangePoint> points; // sorted by critical value, L1 first

    const LagrangePoint& l1() const { return points.front(); }
    /// Distance d = |M - l1| from the Moon to the first Lagrange point.
    double moon_l1_distance() const { return points.front().q[0]; }
};

/// Roots of g(x) = dU/dq1(x,0,0) on the three axis intervals
/// (-inf,0), (0,1), (1,inf); bracketed by a sign-change scan, refined with
/// safeguarded Newton to |g| < 1e-12. Returned sorted by x.
std::vector<double> collinear_points(const MassRatio& mu);

/// The two off-axis critical points of U (2-D Newton on grad U from the
/// equilateral starting guess), residual |grad U| < 1e-10.
std::vector<Vec3> triangular_points(const MassRatio& mu);

/// All five Lagrange points with lifts and critical values, sorted by
/// (critical value, q1, q2). The point between the primaries must attain the
/// smallest critical value; a violation throws std::runtime_error.
LagrangeSet lagrange_set(const MassRatio& mu);

} // namespace crtbp
