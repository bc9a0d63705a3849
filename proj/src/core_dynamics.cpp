#include "crtbp/core_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace crtbp {

namespace {
constexpr double kCollisionDistSq = 1e-28; // exact-collision guard, ~1e-14 in distance
}

PrimaryDistances primary_distances(const Vec3& q) {
    const Vec3 qe = q - earth_position();
    const double rm2 = dot(q, q);
    const double re2 = dot(qe, qe);
    if (rm2 < kCollisionDistSq || re2 < kCollisionDistSq)
        throw std::domain_error("state collides with a primary");
    return {std::sqrt(rm2), std::sqrt(re2)};
}

double eval_H(const RotatingState& s, const MassRatio& mr) {
    const double mu = mr.value();
    const auto [rm, re] = primary_distances(s.q);
    const double kinetic = 0.5 * dot(s.p, s.p);
    const double magnetic = s.p[0] * s.q[1] - s.p[1] * (s.q[0] - 1.0 + mu);
    return kinetic - mu / rm - (1.0 - mu) / re + magnetic;
}

double eval_U(const Vec3& q, const MassRatio& mr) {
    const double mu = mr.value();
    const auto [rm, re] = primary_distances(q);
    const double a = q[0] - 1.0 + mu;
    return -mu / rm - (1.0 - mu) / re - 0.5 * (a * a + q[1] * q[1]);
}

double eval_H_completed_square(const RotatingState& s, const MassRatio& mr) {
    const double mu = mr.value();
    const double v1 = s.p[0] + s.q[1];
    const double v2 = s.p[1] - s.q[0] + 1.0 - mu;
    const double v3 = s.p[2];
    return 0.5 * (v1 * v1 + v2 * v2 + v3 * v3) + eval_U(s.q, mr);
}

Vec3 grad_U(const Vec3& q, const MassRatio& mr) {
    const double mu = mr.value();
    const auto [rm, re] = primary_distances(q);
    const double im3 = mu / (rm * rm * rm);
    const double ie3 = (1.0 - mu) / (re * re * re);
    return {im3 * q[0] + ie3 * (q[0] - 1.0) - (q[0] - 1.0 + mu),
            im3 * q[1] + ie3 * q[1] - q[1],
            im3 * q[2] + ie3 * q[2]};
}

Vec6 grad_H(const RotatingState& s, const MassRatio& mr) {
    const double mu = mr.value();
    const auto [rm, re] = primary_distances(s.q);
    const double im3 = mu / (rm * rm * rm);
    const double ie3 = (1.0 - mu) / (re * re * re);
    return {im3 * s.q[0] + ie3 * (s.q[0] - 1.0) - s.p[1],
            im3 * s.q[1] + ie3 * s.q[1] + s.p[0],
            im3 * s.q[2] + ie3 * s.q[2],
            s.p[0] + s.q[1],
            s.p[1] - (s.q[0] - 1.0 + mu),
            s.p[2]};
}

Mat6 hessian_H(const RotatingState& s, const MassRatio& mr) {
    const double mu = mr.value();
    const auto [rm, re] = primary_distances(s.q);
    Mat6 h{};

    // Gravity blocks: for a primary of mass nu at P,
    //   d2/dq2 (-nu/|q-P|) = nu * (I/r^3 - 3 (q-P)(q-P)^T / r^5).
    const Vec3 dm = s.q;
    const Vec3 de = s.q - earth_position();
    const double cm3 = mu / (rm * rm * rm);
    const double cm5 = 3.0 * mu / (rm * rm * rm * rm * rm);
    const double ce3 = (1.0 - mu) / (re * re * re);
    const double ce5 = 3.0 * (1.0 - mu) / (re * re * re * re * re);
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) {
            const double iden = (i == j) ? 1.0 : 0.0;
            h(i, j) = cm3 * iden - cm5 * (dm[static_cast<std::size_t>(i)] * dm[static_cast<std::size_t>(j)]) +
                      ce3 * iden - ce5 * (de[static_cast<std::size_t>(i)] * de[static_cast<std::size_t>(j)]);
        }
        h(3 + i, 3 + i) = 1.0;
    }
    // Magnetic cross terms from p1*q2 - p2*(q1-1+mu).
    h(0, 4) = h(4, 0) = -1.0;
    h(1, 3) = h(3, 1) = 1.0;
    return h;
}

Vec6 hamiltonian_vector_field(const RotatingState& s, const MassRatio& mr) {
    const Vec6 g = grad_H(s, mr);
    return {-g[3], -g[4], -g[5], g[0], g[1], g[2]};
}

SphericalCoords to_spherical(const Vec3& q) {
    const double rho = norm(q);
    if (!(rho > 0.0)) throw std::domain_error("spherical coordinates undefined at the origin");
    SphericalCoords s;
    s.rho = rho;
    s.phi = std::acos(std::clamp(q[2] / rho, -1.0, 1.0));
    if (q[0] == 0.0 && q[1] == 0.0) {
        s.theta = 0.0; // pole convention
    } else {
        s.theta = std::atan2(q[1], q[0]);
        if (s.theta < 0.0) s.theta += 2.0 * kPi;
    }
    return s;
}

Vec3 from_spherical(const SphericalCoords& s) {
    const double sf = std::sin(s.phi);
    return {s.rho * std::cos(s.theta) * sf, s.rho * std::sin(s.theta) * sf, s.rho * std::cos(s.phi)};
}

RotatingState to_barycentric_frame(const RotatingState& s, const MassRatio& mr) {
    RotatingState out = s;
    out.q[0] += -1.0 + mr.value();
    return out;
}

RotatingState from_barycentric_frame(const RotatingState& s, const MassRatio& mr) {
    RotatingState out = s;
    out.q[0] -= -1.0 + mr.value();
    return out;
}

} // namespace crtbp
