#include "crtbp/moser.hpp"

#include "crtbp/core_dynamics.hpp"
#include "crtbp/lagrange_points.hpp"
#include "crtbp/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace crtbp {

namespace {
// Frame constants of the switch chart (Moon-at-origin synodical frame).
constexpr double kMEx = -1.0; // (M - E)_1
inline double moon_x1(double mu) { return -(1.0 - mu); } // barycentric M1

inline Vec3 w_vector(const RegularizedState& s) {
    const double om = 1.0 - s.xi[0];
    return {om * s.eta[1] + s.eta[0] * s.xi[1] + kMEx, om * s.eta[2] + s.eta[0] * s.xi[2],
            om * s.eta[3] + s.eta[0] * s.xi[3]};
}
} // namespace

SwitchedState switch_map(const RotatingState& s) {
    return {{-s.p[0], -s.p[1], -s.p[2]}, s.q};
}

RotatingState switch_map_inverse(const SwitchedState& s) {
    return {s.y, {-s.x[0], -s.x[1], -s.x[2]}};
}

RegularizedState to_regularized(const SwitchedState& s) {
    const double x2 = dot(s.x, s.x);
    const double den = x2 + 1.0;
    const double xy = dot(s.x, s.y);
    RegularizedState r;
    r.xi = {(x2 - 1.0) / den, 2.0 * s.x[0] / den, 2.0 * s.x[1] / den, 2.0 * s.x[2] / den};
    r.eta = {xy, 0.5 * den * s.y[0] - xy * s.x[0], 0.5 * den * s.y[1] - xy * s.x[1],
             0.5 * den * s.y[2] - xy * s.x[2]};
    return r;
}

SwitchedState from_regularized(const RegularizedState& s) {
    const double om = 1.0 - s.xi[0];
    if (std::abs(om) < 1e-14)
        throw std::domain_error("from_regularized: xi0 = 1 is the collision/infinity point of "
                                "the chart; no finite (x,y) image");
    SwitchedState out;
    out.x = {s.xi[1] / om, s.xi[2] / om, s.xi[3] / om};
    out.y = {om * s.eta[1] + s.eta[0] * s.xi[1], om * s.eta[2] + s.eta[0] * s.xi[2],
             om * s.eta[3] + s.eta[0] * s.xi[3]};
    return out;
}

RegularizedState regularize(const RotatingState& s) { return to_regularized(switch_map(s)); }

RotatingState unregularize(const RegularizedState& s) {
    return switch_map_inverse(from_regularized(s));
}

RegularizedState project_to_constraints(const RegularizedState& s) {
    RegularizedState out = s;
    const double n = norm(out.xi);
    if (!(n > 0.0)) throw std::domain_error("project_to_constraints: xi = 0");
    for (auto& v : out.xi) v /= n;
    const double t = dot(out.xi, out.eta);
    for (int i = 0; i < 4; ++i) out.eta[static_cast<std::size_t>(i)] -= t * out.xi[static_cast<std::size_t>(i)];
    return out;
}

double eval_f(const RegularizedState& s, const RegularizedLevel& level) {
    const double om = 1.0 - s.xi[0];
    const Vec3 w = w_vector(s);
    const double wn = norm(w);
    if (wn < 1e-14)
        throw std::domain_error("eval_f: Earth collision in the Moon chart");
    return 1.0 - (1.0 - level.mu) * om / wn + om * (s.xi[2] * s.eta[1] - s.xi[1] * s.eta[2]) +
           s.xi[2] * moon_x1(level.mu) - (level.c + 0.5) * om;
}

double eval_Q_reg(const RegularizedState& s, const RegularizedLevel& level) {
    const double f = eval_f(s, level);
    const double e2 = dot(s.eta, s.eta);
    return 0.5 * e2 * f * f;
}

Vec8 grad_f(const RegularizedState& s, const RegularizedLevel& level) {
    const double mu = level.mu;
    const double om = 1.0 - s.xi[0];
    const Vec3 w = w_vector(s);
    const double wn = norm(w);
    if (wn < 1e-14) throw std::domain_error("grad_f: Earth collision in the Moon chart");
    const double iw3 = 1.0 / (wn * wn * wn);
    const double mag = s.xi[2] * s.eta[1] - s.xi[1] * s.eta[2];
    const Vec3 ev{s.eta[1], s.eta[2], s.eta[3]};
    const Vec3 xv{s.xi[1], s.xi[2], s.xi[3]};

    Vec8 g{};
    // d/dxi0: the Earth term is -(1-mu) * om / |w| with dw/dxi0 = -eta_vec.
    g[0] = -(1.0 - mu) * (-1.0 / wn + om * dot(w, ev) * iw3) - mag + (level.c + 0.5);
    // d/dxi_j: dw/dxi_j = eta0 e_j.
    for (int j = 1; j <= 3; ++j)
        g[static_cast<std::size_t>(j)] =
            (1.0 - mu) * om * s.eta[0] * w[static_cast<std::size_t>(j - 1)] * iw3;
    g[1] += om * (-s.eta[2]);
    g[2] += om * s.eta[1] + moon_x1(mu);
    // d/deta0: dw/deta0 = xi_vec.
    g[4] = (1.0 - mu) * om * dot(w, xv) * iw3;
    // d/deta_j: dw/deta_j = om e_j.
    for (int j = 1; j <= 3; ++j)
        g[static_cast<std::size_t>(4 + j)] =
            (1.0 - mu) * om * om * w[static_cast<std::size_t>(j - 1)] * iw3;
    g[5] += om * s.xi[2];
    g[6] += om * (-s.xi[1]);
    return g;
}

Vec8 grad_Q_reg(const RegularizedState& s, const RegularizedLevel& level) {
    const double f = eval_f(s, level);
    const double e2 = dot(s.eta, s.eta);
    const Vec8 gf = grad_f(s, level);
    Vec8 g{};
    for (int i = 0; i < 4; ++i) g[static_cast<std::size_t>(i)] = e2 * f * gf[static_cast<std::size_t>(i)];
    for (int i = 4; i < 8; ++i)
        g[static_cast<std::size_t>(i)] = f * f * s.eta[static_cast<std::size_t>(i - 4)] +
                                         e2 * f * gf[static_cast<std::size_t>(i)];
    return g;
}

double eta_dot_deta_f(const RegularizedState& s, const RegularizedLevel& level) {
    const Vec8 g = grad_f(s, level);
    return s.eta[0] * g[4] + s.eta[1] * g[5] + s.eta[2] * g[6] + s.eta[3] * g[7];
}

double x_of_q(const RegularizedState& s, const RegularizedLevel& level) {
    const double f = eval_f(s, level);
    const double e2 = dot(s.eta, s.eta);
    return e2 * f * f + e2 * f * eta_dot_deta_f(s, level);
}

double earth_term_eta_gradient_norm(const RegularizedState& s, const RegularizedLevel& level) {
    const double mu = level.mu;
    const double om = 1.0 - s.xi[0];
    const Vec3 w = w_vector(s);
    const double wn = norm(w);
    const double iw3 = 1.0 / (wn * wn * wn);
    const Vec3 xv{s.xi[1], s.xi[2], s.xi[3]};
    // EarthTerm = (1-mu) om / |w|; d/deta0 = -(1-mu) om <w,xi>/|w|^3,
    // d/deta_j = -(1-mu) om^2 w_j/|w|^3.
    const double g0 = (1.0 - mu) * om * dot(w, xv) * iw3;
    double s2 = g0 * g0;
    for (int j = 0; j < 3; ++j) {
        const double gj = (1.0 - mu) * om * om * w[static_cast<std::size_t>(j)] * iw3;
        s2 += gj * gj;
    }
    return std::sqrt(s2);
}

double regularized_chart_eps_limit(const MassRatio& mu) {
    return 0.5 * mu.value();
}

RegularizedCertificate certify_regularized(const EnergyLevel& c, const MassRatio& mr, double eps,
                                           std::size_t n_samples, std::uint64_t seed) {
    const double mu = mr.value();
    const RegularizedLevel level(mr, c);
    const LagrangeSet lset = lagrange_set(mr);
    const double c1 = lset.l1().critical_value;
    if (!(c.value() < c1))
        throw std::invalid_argument("certify_regularized: requires c below the first critical "
                                    "value (the gluing regime is handled by the connected-sum "
                                    "module)");
    if (!(eps > 0.0))
        throw std::invalid_argument("certify_regularized: eps must be positive");
    if (eps >= regularized_chart_eps_limit(mr))
        throw std::invalid_argument("certify_regularized: eps exceeds the feasible chart size "
                                    "eps' = mu/2 from the |f| bound");

    RegularizedCertificate cert;
    cert.mu = mu;
    cert.c = c.value();
    cert.eps = eps;
    cert.seed = seed;
    cert.n_reg_samples = n_samples;

    cert.min_xq = 1e300;
    cert.min_abs_f = 1e300;
    cert.max_abs_eta = 0.0;
    cert.max_level_residual = 0.0;
    cert.measured_C = 0.0;
    double min_bound_slack = 1e300;

    // Near region: on-shell states with |q - M| <= eps mapped through the
    // chart, plus exact collision-locus points (xi at the north pole).
    const std::size_t n_pole = std::max<std::size_t>(1, n_samples / 20);
    for (std::size_t i = 0; i < n_samples; ++i) {
        Rng rng = Rng::for_sample(seed ^ 0xA5A5A5A5ULL, i);
        RegularizedState rs;
        if (i < n_pole) {
            // Collision locus: xi = north pole, eta0 = 0, |eta| |f| = mu with
            // f = 1 there, so |eta| = mu.
            const Vec3 dir = rng.unit_vec3();
            rs.xi = {1.0, 0.0, 0.0, 0.0};
            rs.eta = {0.0, mu * dir[0], mu * dir[1], mu * dir[2]};
        } else {
            Vec3 q = rng.ball_point(eps);
            double u = eval_U(q, mr);
            std::size_t tries = 0;
            while (u > c.value() && ++tries < 100000) {
                q = rng.ball_point(eps);
                u = eval_U(q, mr);
            }
            if (u > c.value())
                throw std::runtime_error("certify_regularized: no allowed position inside the "
                                         "chart ball (Hill radius below eps?)");
            const double speed = std::sqrt(2.0 * (c.value() - u));
            const Vec3 v = speed * rng.unit_vec3();
            RotatingState st;
            st.q = q;
            st.p = {v[0] - q[1], v[1] + q[0] - 1.0 + mu, v[2]};
            rs = regularize(st);
            cert.max_level_residual = std::max(
                cert.max_level_residual, std::abs(eval_Q_reg(rs, level) - level.target_value));
        }

        const double f = eval_f(rs, level);
        const double abs_eta = norm(rs.eta);
        const double xq = x_of_q(rs, level);
        const double grad_norm = earth_term_eta_gradient_norm(rs, level);
        const double om = 1.0 - rs.xi[0];
        if (om > 1e-12)
            cert.measured_C = std::max(cert.measured_C, grad_norm / ((1.0 - mu) * om));

        cert.min_abs_f = std::min(cert.min_abs_f, std::abs(f));
        cert.max_abs_eta = std::max(cert.max_abs_eta, abs_eta);
        cert.min_xq = std::min(cert.min_xq, xq);
    }
    // Lower bound with the measured Earth-term constant.
    const double bound = mu * mu - 2.0 * mu * eps * (1.0 + (1.0 - mu) * cert.measured_C);
    min_bound_slack = cert.min_xq - bound;
    cert.min_xq_bound_slack = min_bound_slack;

    // Away region: radial-field certificate over the Moon component with the
    // inner eps/2 ball removed by construction of the margin samples below.
    CertifySpec away_spec;
    away_spec.seed = seed;
    away_spec.n_samples = n_samples;
    away_spec.inner_radius = 0.5 * eps;
    away_spec.keep_samples = false;
    TransversalityCertificate away =
        certify_component(c, mr, Component::Moon, away_spec);
    cert.away = away;

    // Overlap collar eps/2 <= |q - M| <= eps: both pairings evaluated at the
    // same physical states.
    const std::size_t n_collar = std::max<std::size_t>(64, n_samples / 10);
    cert.n_collar_samples = n_collar;
    cert.collar_min_xh = 1e300;
    cert.collar_min_xq = 1e300;
    std::size_t collar_found = 0;
    for (std::size_t i = 0; i < n_collar; ++i) {
        Rng rng = Rng::for_sample(seed ^ 0xC011A7ULL, i);
        double r = eps * (0.5 + 0.5 * rng.uniform());
        Vec3 q = r * rng.unit_vec3();
        double u = eval_U(q, mr);
        std::size_t tries = 0;
        while (u > c.value() && ++tries < 10000) {
            r = eps * (0.5 + 0.5 * rng.uniform());
            q = r * rng.unit_vec3();
            u = eval_U(q, mr);
        }
        if (u > c.value()) continue;
        ++collar_found;
        const double speed = std::sqrt(2.0 * (c.value() - u));
        const Vec3 v = speed * rng.unit_vec3();
        RotatingState st;
        st.q = q;
        st.p = {v[0] - q[1], v[1] + q[0] - 1.0 + mu, v[2]};
        cert.collar_min_xh = std::min(cert.collar_min_xh, x_of_h(st, mr));
        cert.collar_min_xq = std::min(cert.collar_min_xq, x_of_q(regularize(st), level));
    }
    if (collar_found == 0) {
        cert.gap_description = "overlap collar [eps/2, eps] around the Moon contains no allowed "
                               "position: the two certified regions do not overlap";
        cert.pass = false;
        return cert;
    }

    cert.pass = cert.min_xq > 0.0 && cert.min_abs_f >= 0.5 * mu && cert.max_abs_eta <= 2.0 &&
                away.pass && cert.collar_min_xh > 0.0 && cert.collar_min_xq > 0.0;
    return cert;
}

} // namespace crtbp
