#pragma once

#include "crtbp/lagrange_points.hpp"
#include "crtbp/types.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace crtbp {

enum class Component { Moon, Earth };

const char* to_string(Component c);

/// Closed-form dU/drho in the spherical chart about the Moon.
double du_drho(double rho, double theta, double phi, const MassRatio& mu);

/// Closed-form d2U/drho2 in the spherical chart about the Moon.
double d2u_drho2(double rho, double theta, double phi, const MassRatio& mu);

/// Pairing dH(X) of the Moon-centered radial Liouville field X = q . d/dq:
///   X(H) = mu/|q| + (1-mu) q.(q-e)/|q-e|^3 + p1 q2 - p2 q1.
double x_of_h(const RotatingState& s, const MassRatio& mu);

/// Same pairing for the radial field centered at an arbitrary primary
/// position P on the x-axis, evaluated as grad H . (q - P, 0).
double x_of_h_centered(const RotatingState& s, const MassRatio& mu, const Vec3& center);

struct CertifySpec {
    std::uint64_t seed = 1;
    std::size_t n_samples = 100000;
    double exclusion_radius = 0.0; // ball around L1 removed from sampling (above-c1 regime)
    double inner_radius = 0.0;     // ball around the component's primary removed from sampling
    std::size_t max_rejections = 100000;
    bool keep_samples = false; // retain per-sample states and margins
};

struct CertificateSample {
    RotatingState state;
    double margin;
};

/// Sampled transversality certificate for one energy hypersurface component.
/// PASS means strictly positive minimum margin; no tolerance slack is applied,
/// a non-positive sample is a counterexample candidate.
struct TransversalityCertificate {
    double mu = 0.0;
    double c = 0.0;
    std::string component;
    std::uint64_t seed = 0;
    std::size_t n_samples = 0;
    double min_margin = 0.0;
    double max_margin = 0.0;
    RotatingState argmin_state;
    double exclusion_radius = 0.0;
    bool pass = false;
    std::vector<CertificateSample> samples; // populated when keep_samples is set
};

/// Draw an on-shell state of H^-1(c) over the given component: the position
/// is rejection-sampled from {U <= c} in the primary's bounding ball, the
/// shifted momentum (p1+q2, p2-q1+1-mu, p3) is uniform on the sphere of
/// radius sqrt(2(c-U)). Sample `index` is a pure function of (seed, index).
RotatingState sample_hypersurface_state(const EnergyLevel& c, const MassRatio& mu,
                                        Component component, const LagrangeSet& lset,
                                        std::uint64_t seed, std::uint64_t index,
                                        double exclusion_radius = 0.0, double inner_radius = 0.0,
                                        std::size_t max_rejections = 100000);

/// Sampled certificate that dH(X) > 0 on the component, X the radial
/// Liouville field of the component's primary. For c above the first
/// critical value a positive exclusion radius around L1 is required.
TransversalityCertificate certify_component(const EnergyLevel& c, const MassRatio& mu,
                                            Component component, const CertifySpec& spec);

} // namespace crtbp
