#include "crtbp/transversality.hpp"

#include "crtbp/core_dynamics.hpp"
#include "crtbp/kernels.hpp"
#include "crtbp/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace crtbp {

const char* to_string(Component c) { return c == Component::Moon ? "moon" : "earth"; }

double du_drho(double rho, double theta, double phi, const MassRatio& mu) {
    const double w = std::cos(theta) * std::sin(phi);
    const double s2f = std::sin(phi) * std::sin(phi);
    double out;
    kernels::du_drho(&rho, &w, &s2f, 1, mu.value(), &out);
    return out;
}

double d2u_drho2(double rho, double theta, double phi, const MassRatio& mu) {
    const double w = std::cos(theta) * std::sin(phi);
    const double s2f = std::sin(phi) * std::sin(phi);
    double out;
    kernels::d2u_drho2(&rho, &w, &s2f, 1, mu.value(), &out);
    return out;
}

double x_of_h(const RotatingState& s, const MassRatio& mr) {
    const double mu = mr.value();
    const auto [rm, re] = primary_distances(s.q);
    const Vec3 qe = s.q - earth_position();
    return mu / rm + (1.0 - mu) * dot(s.q, qe) / (re * re * re) + s.p[0] * s.q[1] -
           s.p[1] * s.q[0];
}

double x_of_h_centered(const RotatingState& s, const MassRatio& mu, const Vec3& center) {
    const Vec6 g = grad_H(s, mu);
    const Vec3 d = s.q - center;
    return g[0] * d[0] + g[1] * d[1] + g[2] * d[2];
}

RotatingState sample_hypersurface_state(const EnergyLevel& c, const MassRatio& mr,
                                        Component component, const LagrangeSet& lset,
                                        std::uint64_t seed, std::uint64_t index,
                                        double exclusion_radius, double inner_radius,
                                        std::size_t max_rejections) {
    const double mu = mr.value();
    const double d_moon = lset.moon_l1_distance();
    const Vec3 center = component == Component::Moon ? moon_position() : earth_position();
    const double radius = component == Component::Moon ? d_moon : 1.0 - d_moon;
    const Vec3 l1 = lset.l1().q;

    Rng rng = Rng::for_sample(seed, index);
    Vec3 q{};
    double u = 0.0;
    bool ok = false;
    for (std::size_t tries = 0; tries < max_rejections; ++tries) {
        q = center + rng.ball_point(radius);
        u = eval_U(q, mr);
        if (u > c.value()) continue;
        if (exclusion_radius > 0.0 && norm(q - l1) < exclusion_radius) continue;
        if (inner_radius > 0.0 && norm(q - center) < inner_radius) continue;
        ok = true;
        break;
    }
    if (!ok)
        throw std::runtime_error("hypersurface sampling failed: no allowed position found "
                                 "(component empty at this energy?)");

    const double speed = std::sqrt(2.0 * (c.value() - u));
    const Vec3 v = speed * rng.unit_vec3();
    RotatingState s;
    s.q = q;
    s.p = {v[0] - q[1], v[1] + q[0] - 1.0 + mu, v[2]};
    return s;
}

TransversalityCertificate certify_component(const EnergyLevel& c, const MassRatio& mr,
                                            Component component, const CertifySpec& spec) {
    const LagrangeSet lset = lagrange_set(mr);
    const double c1 = lset.l1().critical_value;

    if (std::abs(c.value() - c1) < 1e-12)
        throw std::invalid_argument("certify_component: the critical level c1 is singular");
    if (c.value() > c1 && spec.exclusion_radius <= 0.0)
        throw std::invalid_argument(
            "certify_component: energies above c1 need an exclusion ball around L1");

    TransversalityCertificate cert;
    cert.mu = mr.value();
    cert.c = c.value();
    cert.component = to_string(component);
    cert.seed = spec.seed;
    cert.n_samples = spec.n_samples;
    cert.exclusion_radius = spec.exclusion_radius;

    const Vec3 center = component == Component::Moon ? moon_position() : earth_position();

    // Batched margin evaluation in blocks.
    constexpr std::size_t kBlock = 4096;
    std::vector<RotatingState> states(kBlock);
    std::vector<double> qx(kBlock), qy(kBlock), qz(kBlock), px(kBlock), py(kBlock),
        margin(kBlock);

    double min_margin = 1e300, max_margin = -1e300;
    RotatingState argmin;
    std::uint64_t index = 0;
    if (spec.keep_samples) cert.samples.reserve(spec.n_samples);

    for (std::size_t done = 0; done < spec.n_samples;) {
        const std::size_t nb = std::min(kBlock, spec.n_samples - done);
        for (std::size_t i = 0; i < nb; ++i, ++index) {
            states[i] = sample_hypersurface_state(c, mr, component, lset, spec.seed, index,
                                                  spec.exclusion_radius, spec.inner_radius,
                                                  spec.max_rejections);
            qx[i] = states[i].q[0];
            qy[i] = states[i].q[1];
            qz[i] = states[i].q[2];
            px[i] = states[i].p[0];
            py[i] = states[i].p[1];
        }
        kernels::x_of_h(qx.data(), qy.data(), qz.data(), px.data(), py.data(), nb, mr.value(),
                        center[0], margin.data());
        for (std::size_t i = 0; i < nb; ++i) {
            if (margin[i] < min_margin) {
                min_margin = margin[i];
                argmin = states[i];
            }
            max_margin = std::max(max_margin, margin[i]);
            if (spec.keep_samples) cert.samples.push_back({states[i], margin[i]});
        }
        done += nb;
    }

    cert.min_margin = min_margin;
    cert.max_margin = max_margin;
    cert.argmin_state = argmin;
    cert.pass = min_margin > 0.0;
    return cert;
}

} // namespace crtbp
