#pragma once

#include "crtbp/lagrange_points.hpp"
#include "crtbp/transversality.hpp"
#include "crtbp/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace crtbp {

// Constructions near the first Lagrange point for energies around c1: the
// quadratic model Q of H at L1, the linear Liouville fields Y_{a,b,gamma},
// the primitive G of alpha_1 - alpha_0, and the cut-off interpolation Z
// between the primary-centered radial field and Y.
//
// All evaluations use displacement coordinates (u, v) = (q, p) - L1 phase
// point. The quadratic-form matrix follows the ordered basis
// (q1, q2, p1, p2, q3, p3).

/// Quadratic part of H at L1 as a 6x6 matrix (includes the 1/2 prefactor,
/// so Q(x) = x^T matrix x and matrix = Hessian(H at L1) / 2).
struct QuadraticFormQ {
    double rho_param = 0.0; // mu/|qL-M|^3 + (1-mu)/|qL-E|^3
    Mat6 matrix;            // ordered basis (q1,q2,p1,p2,q3,p3)
    Vec3 l1_position{};
    Vec6 l1_phase{};
};

struct YFieldParams {
    double a = -0.5;   // < 0
    double b = 0.5;    // > 0
    double gamma = 0.5; // in (0,1)
};

QuadraticFormQ quadratic_form_at_L1(const MassRatio& mu);

/// Reorder a standard displacement (u1,u2,u3,v1,v2,v3) to the block basis
/// (q1,q2,p1,p2,q3,p3) that keeps the planar and vertical parts separate.
Vec6 to_block_basis(const Vec6& standard);

/// Value of the quadratic form on a standard-ordered displacement.
double eval_Q_form(const QuadraticFormQ& q, const Vec6& displacement);

/// Symmetrized matrix of the derivative Y(Q): S = A D + D A with
/// D = diag(a, b, 1-a, 1-b, gamma, 1-gamma) in the block basis.
Mat6 y_of_q_matrix(const QuadraticFormQ& q, const YFieldParams& p);

/// Y(Q) evaluated on a standard-ordered displacement.
double y_of_q_value(const QuadraticFormQ& q, const YFieldParams& p, const Vec6& displacement);

/// Eigenvalues (ascending) of the symmetrized Y(Q) matrix.
std::vector<double> y_of_q_spectrum(const QuadraticFormQ& q, const YFieldParams& p);

struct YParamSearchResult {
    YFieldParams params;
    double min_eigenvalue;
    bool positive_definite;
    std::vector<double> spectrum;
};

/// Coarse grid over a in [-2,-0.01], b in (0,2], gamma in (0,1), maximizing
/// the smallest eigenvalue of the symmetrized Y(Q), then a deterministic
/// local polish.
YParamSearchResult find_Y_params(const QuadraticFormQ& q);

/// Displacement of a state from the L1 phase point, standard order.
Vec6 displacement_from_L1(const RotatingState& s, const QuadraticFormQ& q);

/// Y(H) = dH(Y) at a state, Y the linear Liouville field centered at L1.
double y_of_h(const RotatingState& s, const YFieldParams& p, const QuadraticFormQ& q,
              const MassRatio& mu);

/// Primitive G of alpha_1 - alpha_0 in L1-centered coordinates for the given
/// gluing side (P = Moon or Earth):
///   G = (1-a) u1 v1 + (q1^L - P1) v1 + (1-b) u2 v2 + (1-gamma) u3 v3.
double primitive_G(const RotatingState& s, const YFieldParams& p, const QuadraticFormQ& q,
                   Component side);

struct CutoffSpec {
    double s0 = 0.02; // f = 1 for |s| <= s0
    double s1 = 0.06; // f = 0 for |s| >= s1
};

/// C^2 smoothstep cut-off in s = u1 + v2/rho and its derivative.
double cutoff_f(double s, const CutoffSpec& spec);
double cutoff_f_prime(double s, const CutoffSpec& spec);

struct ZBreakdown {
    double total;        // Z(H)
    double term_radial;  // (1-f) dH(Z0)
    double term_y;       // f dH(Z1)
    double term_g;       // G dH(Z_f)
    double s;            // cut-off argument u1 + v2/rho
    double f;            // cut-off value
    Component side;      // which primary's construction applies (sign of s)
};

/// Glued Liouville pairing Z(H) with its three-term decomposition. The Moon
/// construction is used for s <= 0 and the mirrored Earth construction for
/// s > 0; both agree with Y on {f = 1}.
ZBreakdown z_of_h(const RotatingState& s, const YFieldParams& p, const CutoffSpec& cutoff,
                  const QuadraticFormQ& q, const MassRatio& mu);

struct SeparatingSetReport {
    double rho_param = 0.0;
    bool rho_greater_than_one = false;
    double delta = 0.0;
    std::size_t n_samples = 0;
    double max_quadric_residual = 0.0;   // |Q(x)| at constructed ellipsoid points
    double max_equation_residual = 0.0;  // displayed-equation residual at Q=0 samples
    double fitted_radius_sq = 0.0;       // least-squares radius^2 of the slice
    double expected_radius_sq = 0.0;     // (2 rho + 1) delta^2
    double restricted_min_eigenvalue = 0.0; // delta = 0: definiteness on the hyperplane
    bool pass = false;
};

/// Check that {q1 + p2/rho = delta} intersects Q^-1(0) in the displayed
/// ellipsoid (delta != 0), and in the origin alone for delta = 0.
SeparatingSetReport separating_set_check(double delta, const MassRatio& mu,
                                         std::size_t n_samples = 4096, std::uint64_t seed = 7);

struct GluedCertifySpec {
    std::uint64_t seed = 1;
    std::size_t n_samples = 100000;
    double ball_radius = 0.0; // sampling ball around L1; 0 = auto (0.4 * min(d, 1-d))
    std::size_t max_rejections = 200000;
};

struct GluedCertificate {
    double mu = 0.0;
    double c = 0.0;
    YFieldParams params;
    CutoffSpec cutoff;
    double ball_radius = 0.0;
    std::uint64_t seed = 0;
    std::size_t n_samples = 0;
    double min_z = 0.0;
    double min_term_radial = 0.0;
    double min_term_y = 0.0;
    double min_term_g = 0.0;
    RotatingState argmin_state;
    double eps_E = 0.0; // certified half-width above c1 when found by bisection
    bool pass = false;  // min_z >= 0
};

/// Sampled certificate Z(H) >= 0 on H^-1(c) near L1 (the gluing region).
GluedCertificate certify_glued(const EnergyLevel& c, const MassRatio& mu, const YFieldParams& p,
                               const CutoffSpec& cutoff, const GluedCertifySpec& spec);

struct EnergyWindowResult {
    double eps_E = 0.0;       // certified half-width above c1
    double certified_c = 0.0; // a concrete passing energy in (c1, c1 + eps_E]
    GluedCertificate certificate;
};

/// Bisection on the PASS/FAIL boundary of the glued certificate for energies
/// above c1. Capped below the second critical value.
EnergyWindowResult find_energy_window(const MassRatio& mu, const YFieldParams& p,
                                      const CutoffSpec& cutoff, std::size_t n_probe = 20000,
                                      std::uint64_t seed = 1);

} // namespace crtbp
