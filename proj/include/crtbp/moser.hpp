#pragma once

#include "crtbp/transversality.hpp"
#include "crtbp/types.hpp"

#include <cstdint>
#include <string>

namespace crtbp {

// Regularization of the Moon collision chart: time is rescaled by
// ds = dt/|q - M|, the shifted Hamiltonian K = (H - c)|q - M| is pushed
// through the switch map (x, y) = (-p, q - M) and the stereographic cotangent
// chart of S^3, and the smooth Hamiltonian Q = |eta|^2 f^2 / 2 carries the
// compactified hypersurface as its level set Q = mu^2/2.

/// Moser chart point: xi on S^3 in R^4, eta an ambient cotangent vector with
/// <xi, eta> = 0. Stored ambiently; constraint enforced by projection.
struct RegularizedState {
    Vec4 xi{};
    Vec4 eta{};

    double xi_norm_residual() const { return std::abs(norm(xi) - 1.0); }
    double tangency_residual() const { return std::abs(dot(xi, eta)); }
};

struct SwitchedState {
    Vec3 x; // = -p
    Vec3 y; // = q - M
};

struct RegularizedLevel {
    double mu;
    double c;
    double target_value; // = mu^2/2 exactly

    RegularizedLevel(const MassRatio& m, const EnergyLevel& e)
        : mu(m.value()), c(e.value()), target_value(0.5 * m.value() * m.value()) {}
};

SwitchedState switch_map(const RotatingState& s);
RotatingState switch_map_inverse(const SwitchedState& s);

/// Stereographic cotangent chart: x = xi_vec/(1-xi0), y = eta_vec(1-xi0) + xi_vec eta0.
RegularizedState to_regularized(const SwitchedState& s);

/// Inverse chart. Throws std::domain_error at the added point xi0 = 1
/// (the collision locus has no finite (x,y) image).
SwitchedState from_regularized(const RegularizedState& s);

/// Full chart chain rotating state -> (xi, eta) and back.
RegularizedState regularize(const RotatingState& s);
RotatingState unregularize(const RegularizedState& s);

/// Renormalize xi to S^3 and project eta onto the tangency constraint.
RegularizedState project_to_constraints(const RegularizedState& s);

/// The factor f with Q = |eta|^2 f^2 / 2:
///   f = 1 - (1-mu)(1-xi0)/|w| + (1-xi0)(xi2 eta1 - xi1 eta2) + xi2 M1 - (c+1/2)(1-xi0),
/// where w = (1-xi0) eta_vec + eta0 xi_vec + (M - E), M - E = (-1,0,0) and
/// M1 = -(1-mu) are the frame constants of the switch chart.
double eval_f(const RegularizedState& s, const RegularizedLevel& level);

/// Regularized Hamiltonian Q = |eta|^2 f^2 / 2.
double eval_Q_reg(const RegularizedState& s, const RegularizedLevel& level);

/// Analytic 8-gradient of f, ordered (df/dxi0..dxi3, df/deta0..deta3).
Vec8 grad_f(const RegularizedState& s, const RegularizedLevel& level);

/// Analytic 8-gradient of Q.
Vec8 grad_Q_reg(const RegularizedState& s, const RegularizedLevel& level);

/// Radial pairing eta . dQ/deta of the fiber Liouville field eta d/deta:
///   X(Q) = |eta|^2 f^2 + |eta|^2 f (eta . df/deta).
double x_of_q(const RegularizedState& s, const RegularizedLevel& level);

/// eta . df/deta, analytic.
double eta_dot_deta_f(const RegularizedState& s, const RegularizedLevel& level);

/// Norm of the eta-gradient of the Earth term (1-mu)(1-xi0)/|w|, used for the
/// empirical constant C in the X(Q) lower bound.
double earth_term_eta_gradient_norm(const RegularizedState& s, const RegularizedLevel& level);

/// Largest usable chart size: the f >= mu/2 chain needs eps < mu/2 and the
/// Earth-term bound needs eps < mu; the
/// returned value also caps at the Moon Hill radius scale.
double regularized_chart_eps_limit(const MassRatio& mu);

struct RegularizedCertificate {
    double mu = 0.0;
    double c = 0.0;
    double eps = 0.0;
    std::uint64_t seed = 0;

    // Near-Moon regularized region (|y| < eps incl. collision locus).
    std::size_t n_reg_samples = 0;
    double min_xq = 0.0;            // min X(Q) margin
    double min_abs_f = 0.0;         // min |f| (certified bound mu/2)
    double max_abs_eta = 0.0;       // max |eta| (certified bound 2)
    double max_level_residual = 0.0; // max |Q - mu^2/2| over mapped samples
    double measured_C = 0.0;        // sup |grad_eta EarthTerm| / ((1-mu)(1-xi0))
    double min_xq_bound_slack = 0.0; // min of X(Q) - (mu^2 - 2 mu eps (1+(1-mu)C))

    // Unregularized region (|q - M| >= eps/2) certified through dH(X).
    TransversalityCertificate away;

    // Overlap collar eps/2 <= |q - M| <= eps checked in both charts.
    std::size_t n_collar_samples = 0;
    double collar_min_xh = 0.0;
    double collar_min_xq = 0.0;

    std::string gap_description; // non-empty when region coverage failed
    bool pass = false;
};

/// Joint certificate: X(Q) > 0 near the Moon in the regularized chart,
/// dH(X) > 0 away from it, and consistent signs on the shared collar.
RegularizedCertificate certify_regularized(const EnergyLevel& c, const MassRatio& mu, double eps,
                                           std::size_t n_samples, std::uint64_t seed);

} // namespace crtbp
