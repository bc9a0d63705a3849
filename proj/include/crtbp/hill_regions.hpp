#pragma once

#include "crtbp/types.hpp"

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace crtbp {

enum class HillComponentLabel : std::uint8_t {
    Forbidden = 0,
    MoonBounded,
    EarthBounded,
    Unbounded,
    MoonEarthMerged,
};

const char* to_string(HillComponentLabel label);

struct HillGridSpec {
    double x0 = -2.5, x1 = 3.5;
    double y0 = -3.0, y1 = 3.0;
    double z0 = -1.5, z1 = 1.5;
    int nx = 128, ny = 128, nz = 128;
};

/// Connectivity classification of {U <= c} on a regular grid. Components are
/// found by flood fill (6-connectivity); a component is labeled by what it
/// contains: the Moon cell, the Earth cell, both (merged), or the box
/// boundary in the x/y directions (unbounded).
class HillGrid {
  public:
    HillGrid(const EnergyLevel& c, const MassRatio& mu, const HillGridSpec& spec = {});

    HillComponentLabel cell_label(int ix, int iy, int iz) const;
    /// Label of the grid cell containing q (Forbidden for out-of-box points
    /// with U > c; out-of-box allowed points classify as Unbounded).
    HillComponentLabel classify(const Vec3& q) const;

    const HillGridSpec& spec() const { return spec_; }
    double energy() const { return c_; }
    double mu() const { return mu_; }
    int component_count() const { return n_components_; }
    bool merged() const { return merged_; }

    /// CSV rows (q1,q2,q3,label) for every allowed cell center.
    void write_csv(std::ostream& os) const;

  private:
    std::size_t idx(int ix, int iy, int iz) const;
    Vec3 cell_center(int ix, int iy, int iz) const;

    HillGridSpec spec_;
    double c_;
    double mu_;
    std::vector<std::uint8_t> label_;
    int n_components_ = 0;
    bool merged_ = false;
};

struct PointClassification {
    HillComponentLabel label;
    bool near_boundary; // |U(q) - c| below the reporting tolerance
    double u_value;
};

/// One-off classification of a point; builds a transient grid for the
/// connectivity decision. For bulk queries construct a HillGrid directly.
PointClassification classify_point(const Vec3& q, const EnergyLevel& c, const MassRatio& mu,
                                   const HillGridSpec& spec = {}, double boundary_tol = 1e-9);

/// Smallest rho in (0, d) with U(rho; theta, phi) = c along the ray from the
/// Moon; root residual < 1e-12. Requires c below the first critical value so
/// the ray exits the Moon component before rho = d.
double zero_velocity_radius(double theta, double phi, const EnergyLevel& c, const MassRatio& mu,
                            double d);

struct SphereMinResult {
    double theta;
    double phi;
    double u_min;
};

/// Global minimizer of U over the sphere of radius rho about the Moon
/// (dense grid + Newton polish on the spherical gradient).
SphereMinResult sphere_min_U(double rho, const MassRatio& mu);

/// Minimizing theta of U on the circle {rho, phi fixed}.
double circle_min_theta(double rho, double phi, const MassRatio& mu);

/// Critical points in phi of U restricted to the great circle
/// (rho cos(phi), 0, rho sin(phi)), phi in [0, 2 pi); second entry of each
/// pair is true when the point is a local minimum.
std::vector<std::pair<double, bool>> great_circle_critical_points(double rho, const MassRatio& mu);

/// dU/dtheta in the spherical chart (used by the circle minimization).
double du_dtheta(double rho, double theta, double phi, const MassRatio& mu);
/// dU/dphi in the spherical chart.
double du_dphi(double rho, double theta, double phi, const MassRatio& mu);

} // namespace crtbp
