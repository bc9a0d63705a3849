#pragma once

#include "crtbp/types.hpp"

namespace crtbp {

// Canonical frame: rotating (synodical) coordinates with the Moon translated
// to the origin and the Earth at e = (1,0,0).
//
//   H(q,p) = |p|^2/2 - mu/|q| - (1-mu)/|q-e| + p1*q2 - p2*(q1-1+mu)
//
// The frame with the barycentric placement E=(mu,0,0), M=(-1+mu,0,0) is
// reachable through the affine map q_bary = q + (-1+mu,0,0), p unchanged;
// see to_barycentric_frame / from_barycentric_frame.

inline Vec3 moon_position() { return {0.0, 0.0, 0.0}; }
inline Vec3 earth_position() { return {1.0, 0.0, 0.0}; }

/// Jacobi Hamiltonian, direct form.
double eval_H(const RotatingState& s, const MassRatio& mu);

/// Same Hamiltonian evaluated through the completed-square expansion
///   H = ((p1+q2)^2 + (p2-q1+1-mu)^2 + p3^2)/2 + U(q).
/// Agrees with eval_H to round-off; both are kept as a cross-check.
double eval_H_completed_square(const RotatingState& s, const MassRatio& mu);

/// Effective potential U(q) = -mu/|q| - (1-mu)/|q-e| - ((q1-1+mu)^2 + q2^2)/2.
double eval_U(const Vec3& q, const MassRatio& mu);

/// Gradient of U with respect to q.
Vec3 grad_U(const Vec3& q, const MassRatio& mu);

/// Analytic gradient of H, ordered (dH/dq1..dq3, dH/dp1..dp3).
Vec6 grad_H(const RotatingState& s, const MassRatio& mu);

/// Analytic Hessian of H, ordered basis (q1,q2,q3,p1,p2,p3). Symmetric.
Mat6 hessian_H(const RotatingState& s, const MassRatio& mu);

/// Hamiltonian vector field under the fixed convention
///   iota_{X_H} omega = dH  with  omega = dp ^ dq,
/// which gives componentwise qdot = -dH/dp, pdot = +dH/dq.
/// This single convention is used everywhere in the toolkit.
Vec6 hamiltonian_vector_field(const RotatingState& s, const MassRatio& mu);

/// Spherical coordinates about the Moon:
///   q1 = rho cos(theta) sin(phi), q2 = rho sin(theta) sin(phi), q3 = rho cos(phi).
/// At the poles (sin(phi) = 0) theta is conventionally 0.
SphericalCoords to_spherical(const Vec3& q);
Vec3 from_spherical(const SphericalCoords& s);

/// Affine conversion to and from the barycentric-style frame of the
/// time-independent Hamiltonian with E=(mu,0,0), M=(-1+mu,0,0).
RotatingState to_barycentric_frame(const RotatingState& s, const MassRatio& mu);
RotatingState from_barycentric_frame(const RotatingState& s, const MassRatio& mu);

/// Distances to the two primaries; throws std::domain_error at a collision.
struct PrimaryDistances {
    double r_moon;
    double r_earth;
};
PrimaryDistances primary_distances(const Vec3& q);

} // namespace crtbp
