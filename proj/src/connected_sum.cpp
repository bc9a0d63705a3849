#include "crtbp/connected_sum.hpp"

#include "crtbp/core_dynamics.hpp"
#include "crtbp/linalg.hpp"
#include "crtbp/rng.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace crtbp {

namespace {

linalg::Matrix to_linalg(const Mat6& m) {
    linalg::Matrix a(6, 6);
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j) a(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = m(i, j);
    return a;
}

std::array<double, 6> d_diagonal(const YFieldParams& p) {
    return {p.a, p.b, 1.0 - p.a, 1.0 - p.b, p.gamma, 1.0 - p.gamma};
}

double min_eig(const QuadraticFormQ& q, const YFieldParams& p) {
    const Mat6 s = y_of_q_matrix(q, p);
    return linalg::symmetric_eigenvalues(to_linalg(s)).front();
}

} // namespace

QuadraticFormQ quadratic_form_at_L1(const MassRatio& mr) {
    const double mu = mr.value();
    const LagrangeSet lset = lagrange_set(mr);
    const LagrangePoint& l1 = lset.l1();

    QuadraticFormQ q;
    q.l1_position = l1.q;
    q.l1_phase = l1.phase_point;
    const double rm = norm(l1.q - moon_position());
    const double re = norm(l1.q - earth_position());
    q.rho_param = mu / (rm * rm * rm) + (1.0 - mu) / (re * re * re);

    const double r = q.rho_param;
    Mat6& m = q.matrix;
    m(0, 0) = -2.0 * r;
    m(1, 1) = r;
    m(2, 2) = 1.0;
    m(3, 3) = 1.0;
    m(4, 4) = r;
    m(5, 5) = 1.0;
    m(0, 3) = m(3, 0) = -1.0;
    m(1, 2) = m(2, 1) = 1.0;
    for (auto& v : m.a) v *= 0.5;
    return q;
}

Vec6 to_block_basis(const Vec6& s) { return {s[0], s[1], s[3], s[4], s[2], s[5]}; }

double eval_Q_form(const QuadraticFormQ& q, const Vec6& displacement) {
    const Vec6 x = to_block_basis(displacement);
    const Vec6 mx = mat6_apply(q.matrix, x);
    return dotn(x, mx);
}

Mat6 y_of_q_matrix(const QuadraticFormQ& q, const YFieldParams& p) {
    const auto d = d_diagonal(p);
    Mat6 s;
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 6; ++j)
            s(i, j) = q.matrix(i, j) * (d[static_cast<std::size_t>(i)] + d[static_cast<std::size_t>(j)]);
    return s;
}

double y_of_q_value(const QuadraticFormQ& q, const YFieldParams& p, const Vec6& displacement) {
    const Vec6 x = to_block_basis(displacement);
    const Vec6 sx = mat6_apply(y_of_q_matrix(q, p), x);
    return dotn(x, sx);
}

std::vector<double> y_of_q_spectrum(const QuadraticFormQ& q, const YFieldParams& p) {
    return linalg::symmetric_eigenvalues(to_linalg(y_of_q_matrix(q, p)));
}

YParamSearchResult find_Y_params(const QuadraticFormQ& q) {
    YFieldParams best;
    double best_eig = -1e300;
    for (int ia = 0; ia < 40; ++ia) {
        const double a = -2.0 + (2.0 - 0.01) * ia / 39.0;
        for (int ib = 0; ib < 40; ++ib) {
            const double b = 0.05 + (2.0 - 0.05) * ib / 39.0;
            for (int ig = 0; ig < 19; ++ig) {
                const double g = 0.05 + 0.90 * ig / 18.0;
                const double e = min_eig(q, {a, b, g});
                if (e > best_eig) {
                    best_eig = e;
                    best = {a, b, g};
                }
            }
        }
    }
    // Deterministic coordinate polish with shrinking steps.
    double step = 0.05;
    for (int round = 0; round < 40; ++round) {
        bool improved = false;
        for (int coord = 0; coord < 3; ++coord) {
            for (const double dir : {-1.0, 1.0}) {
                YFieldParams trial = best;
                double* v = coord == 0 ? &trial.a : coord == 1 ? &trial.b : &trial.gamma;
                *v += dir * step;
                if (trial.a >= -1e-3 || trial.b <= 1e-3 || trial.gamma <= 1e-3 ||
                    trial.gamma >= 1.0 - 1e-3)
                    continue;
                const double e = min_eig(q, trial);
                if (e > best_eig) {
                    best_eig = e;
                    best = trial;
                    improved = true;
                }
            }
        }
        if (!improved) step *= 0.5;
        if (step < 1e-6) break;
    }

    YParamSearchResult out;
    out.params = best;
    out.spectrum = y_of_q_spectrum(q, best);
    out.min_eigenvalue = out.spectrum.front();
    out.positive_definite = out.min_eigenvalue > 0.0;
    return out;
}

Vec6 displacement_from_L1(const RotatingState& s, const QuadraticFormQ& q) {
    const Vec6 z = s.flat();
    Vec6 d{};
    for (int i = 0; i < 6; ++i)
        d[static_cast<std::size_t>(i)] =
            z[static_cast<std::size_t>(i)] - q.l1_phase[static_cast<std::size_t>(i)];
    return d;
}

double y_of_h(const RotatingState& s, const YFieldParams& p, const QuadraticFormQ& q,
              const MassRatio& mu) {
    const Vec6 d = displacement_from_L1(s, q);
    const Vec6 y{p.a * d[0], p.b * d[1], p.gamma * d[2],
                 (1.0 - p.a) * d[3], (1.0 - p.b) * d[4], (1.0 - p.gamma) * d[5]};
    const Vec6 g = grad_H(s, mu);
    return dotn(g, y);
}

double primitive_G(const RotatingState& s, const YFieldParams& p, const QuadraticFormQ& q,
                   Component side) {
    const Vec6 d = displacement_from_L1(s, q);
    const double p1 = side == Component::Moon ? moon_position()[0] : earth_position()[0];
    const double dp = q.l1_position[0] - p1;
    return (1.0 - p.a) * d[0] * d[3] + dp * d[3] + (1.0 - p.b) * d[1] * d[4] +
           (1.0 - p.gamma) * d[2] * d[5];
}

namespace {
double smootherstep(double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    return x * x * x * (x * (6.0 * x - 15.0) + 10.0);
}
double smootherstep_prime(double x) {
    if (x <= 0.0 || x >= 1.0) return 0.0;
    return 30.0 * x * x * (x - 1.0) * (x - 1.0);
}
} // namespace

double cutoff_f(double s, const CutoffSpec& spec) {
    return smootherstep((spec.s1 - std::abs(s)) / (spec.s1 - spec.s0));
}

double cutoff_f_prime(double s, const CutoffSpec& spec) {
    const double sign = s >= 0.0 ? 1.0 : -1.0;
    return -sign * smootherstep_prime((spec.s1 - std::abs(s)) / (spec.s1 - spec.s0)) /
           (spec.s1 - spec.s0);
}

ZBreakdown z_of_h(const RotatingState& state, const YFieldParams& p, const CutoffSpec& cutoff,
                  const QuadraticFormQ& q, const MassRatio& mu) {
    const Vec6 d = displacement_from_L1(state, q);
    const double rho = q.rho_param;
    const double s = d[0] + d[4] / rho;
    const Component side = s <= 0.0 ? Component::Moon : Component::Earth;
    const Vec3 center = side == Component::Moon ? moon_position() : earth_position();

    const double f = cutoff_f(s, cutoff);
    const double fp = cutoff_f_prime(s, cutoff);
    const double g_val = primitive_G(state, p, q, side);
    const Vec6 grad = grad_H(state, mu);

    // Z0 = (q - P) . d/dq
    const Vec3 qp = state.q - center;
    const double dh_z0 = grad[0] * qp[0] + grad[1] * qp[1] + grad[2] * qp[2];

    // Z1 = Y (independent of the side)
    const Vec6 y{p.a * d[0], p.b * d[1], p.gamma * d[2],
                 (1.0 - p.a) * d[3], (1.0 - p.b) * d[4], (1.0 - p.gamma) * d[5]};
    const double dh_z1 = dotn(grad, y);

    // Z_f = f' (d/dp1 - (1/rho) d/dq2)
    const double dh_zf = fp * (grad[3] - grad[1] / rho);

    ZBreakdown out;
    out.s = s;
    out.f = f;
    out.side = side;
    out.term_radial = (1.0 - f) * dh_z0;
    out.term_y = f * dh_z1;
    out.term_g = g_val * dh_zf;
    out.total = out.term_radial + out.term_y + out.term_g;
    return out;
}

SeparatingSetReport separating_set_check(double delta, const MassRatio& mu, std::size_t n_samples,
                                         std::uint64_t seed) {
    const QuadraticFormQ q = quadratic_form_at_L1(mu);
    const double rho = q.rho_param;

    SeparatingSetReport rep;
    rep.rho_param = rho;
    rep.rho_greater_than_one = rho > 1.0;
    rep.delta = delta;
    rep.n_samples = n_samples;
    rep.expected_radius_sq = (2.0 * rho + 1.0) * delta * delta;
    if (!rep.rho_greater_than_one) return rep; // flagged, nothing more to certify

    Rng rng(seed);
    if (delta != 0.0) {
        // Points of the slice come from the 4-sphere parametrization
        //   (p1+q2, rho q1 - (rho+1) delta, sqrt(rho-1) q2, sqrt(rho) q3, p3)
        // of radius sqrt(2 rho + 1) |delta|; membership in Q^-1(0) is then
        // the nontrivial algebraic identity being checked.
        const double radius = std::sqrt(rep.expected_radius_sq);
        double sum_r2 = 0.0;
        for (std::size_t i = 0; i < n_samples; ++i) {
            std::array<double, 5> dir{};
            double n2 = 0.0;
            for (auto& v : dir) {
                v = 2.0 * rng.uniform() - 1.0;
                n2 += v * v;
            }
            if (n2 < 1e-12) {
                dir = {1, 0, 0, 0, 0};
                n2 = 1.0;
            }
            const double scale = radius / std::sqrt(n2);
            for (auto& v : dir) v *= scale;

            const double q2 = dir[2] / std::sqrt(rho - 1.0);
            const double q1 = (dir[1] + (rho + 1.0) * delta) / rho;
            const double p1 = dir[0] - q2;
            const double q3 = dir[3] / std::sqrt(rho);
            const double p3 = dir[4];
            const double p2 = rho * (delta - q1);
            const Vec6 disp{q1, q2, q3, p1, p2, p3};

            rep.max_quadric_residual =
                std::max(rep.max_quadric_residual, std::abs(eval_Q_form(q, disp)));
            const double lhs = (p1 + q2) * (p1 + q2) +
                               (rho * q1 - (rho + 1.0) * delta) * (rho * q1 - (rho + 1.0) * delta) +
                               (rho - 1.0) * q2 * q2 + rho * q3 * q3 + p3 * p3;
            rep.max_equation_residual =
                std::max(rep.max_equation_residual, std::abs(lhs - rep.expected_radius_sq));
            sum_r2 += lhs;
        }
        rep.fitted_radius_sq = sum_r2 / static_cast<double>(n_samples);
        rep.pass = rep.max_quadric_residual < 1e-10 && rep.max_equation_residual < 1e-10;
    } else {
        // delta = 0: on the hyperplane p2 = -rho q1 the quadric restricts to
        // a positive-definite form in (q1,q2,q3,p1,p3); the slice is a point.
        linalg::Matrix m(5, 5);
        // (p1+q2)^2 + rho^2 q1^2 + (rho-1) q2^2 + rho q3^2 + p3^2
        m(0, 0) = rho * rho;          // q1
        m(1, 1) = (rho - 1.0) + 1.0;  // q2 (from (p1+q2)^2 and (rho-1) q2^2)
        m(2, 2) = rho;                // q3
        m(3, 3) = 1.0;                // p1
        m(4, 4) = 1.0;                // p3
        m(1, 3) = m(3, 1) = 1.0;      // cross p1 q2
        const auto ev = linalg::symmetric_eigenvalues(m);
        rep.restricted_min_eigenvalue = ev.front();

        double max_ratio_err = 0.0;
        for (std::size_t i = 0; i < n_samples; ++i) {
            Vec6 disp{};
            disp[0] = 2.0 * rng.uniform() - 1.0;
            disp[1] = 2.0 * rng.uniform() - 1.0;
            disp[2] = 2.0 * rng.uniform() - 1.0;
            disp[3] = 2.0 * rng.uniform() - 1.0;
            disp[5] = 2.0 * rng.uniform() - 1.0;
            disp[4] = -rho * disp[0]; // hyperplane with delta = 0
            const double lhs = (disp[3] + disp[1]) * (disp[3] + disp[1]) +
                               rho * rho * disp[0] * disp[0] + (rho - 1.0) * disp[1] * disp[1] +
                               rho * disp[2] * disp[2] + disp[5] * disp[5];
            const double qv = eval_Q_form(q, disp);
            max_ratio_err = std::max(max_ratio_err, std::abs(2.0 * qv - lhs));
        }
        rep.max_equation_residual = max_ratio_err;
        rep.pass = rep.restricted_min_eigenvalue > 0.0 && max_ratio_err < 1e-10;
    }
    return rep;
}

GluedCertificate certify_glued(const EnergyLevel& c, const MassRatio& mr, const YFieldParams& p,
                               const CutoffSpec& cutoff, const GluedCertifySpec& spec) {
    const double mu = mr.value();
    const QuadraticFormQ q = quadratic_form_at_L1(mr);
    const double d = q.l1_position[0];
    const double ball = spec.ball_radius > 0.0 ? spec.ball_radius : 0.4 * std::min(d, 1.0 - d);

    GluedCertificate cert;
    cert.mu = mu;
    cert.c = c.value();
    cert.params = p;
    cert.cutoff = cutoff;
    cert.ball_radius = ball;
    cert.seed = spec.seed;
    cert.n_samples = spec.n_samples;
    cert.min_z = 1e300;
    cert.min_term_radial = 1e300;
    cert.min_term_y = 1e300;
    cert.min_term_g = 1e300;

    for (std::size_t i = 0; i < spec.n_samples; ++i) {
        Rng rng = Rng::for_sample(spec.seed ^ 0x617ED5EAULL, i);
        Vec3 pos{};
        double u = 0.0;
        bool ok = false;
        for (std::size_t tries = 0; tries < spec.max_rejections; ++tries) {
            pos = q.l1_position + rng.ball_point(ball);
            u = eval_U(pos, mr);
            if (u <= c.value()) {
                ok = true;
                break;
            }
        }
        if (!ok)
            throw std::runtime_error("certify_glued: no allowed position near L1 at this energy");

        const double speed = std::sqrt(2.0 * (c.value() - u));
        const Vec3 v = speed * rng.unit_vec3();
        RotatingState st;
        st.q = pos;
        st.p = {v[0] - pos[1], v[1] + pos[0] - 1.0 + mu, v[2]};

        const ZBreakdown zb = z_of_h(st, p, cutoff, q, mr);
        if (zb.total < cert.min_z) {
            cert.min_z = zb.total;
            cert.argmin_state = st;
        }
        cert.min_term_radial = std::min(cert.min_term_radial, zb.term_radial);
        cert.min_term_y = std::min(cert.min_term_y, zb.term_y);
        cert.min_term_g = std::min(cert.min_term_g, zb.term_g);
    }
    cert.pass = cert.min_z >= 0.0;
    return cert;
}

EnergyWindowResult find_energy_window(const MassRatio& mr, const YFieldParams& p,
                                      const CutoffSpec& cutoff, std::size_t n_probe,
                                      std::uint64_t seed) {
    const LagrangeSet lset = lagrange_set(mr);
    const double c1 = lset.l1().critical_value;
    const double c2 = lset.points[1].critical_value;

    auto passes = [&](double e) {
        GluedCertifySpec spec;
        spec.seed = seed;
        spec.n_samples = n_probe;
        try {
            return certify_glued(EnergyLevel(c1 + e), mr, p, cutoff, spec).pass;
        } catch (const std::exception&) {
            return false;
        }
    };

    double hi = std::min(0.9 * (c2 - c1), 0.05 * std::abs(c1));
    double lo = 1e-7 * std::abs(c1);
    if (!passes(lo)) return {}; // no window found at probe resolution
    if (passes(hi)) {
        EnergyWindowResult out;
        out.eps_E = hi;
        out.certified_c = c1 + 0.5 * hi;
        GluedCertifySpec spec;
        spec.seed = seed;
        spec.n_samples = n_probe;
        out.certificate = certify_glued(EnergyLevel(out.certified_c), mr, p, cutoff, spec);
        out.certificate.eps_E = out.eps_E;
        return out;
    }
    for (int it = 0; it < 24; ++it) {
        const double mid = std::sqrt(lo * hi); // log-midpoint; the window can be tiny
        if (passes(mid))
            lo = mid;
        else
            hi = mid;
    }
    EnergyWindowResult out;
    out.eps_E = lo;
    out.certified_c = c1 + 0.5 * lo;
    GluedCertifySpec spec;
    spec.seed = seed;
    spec.n_samples = n_probe;
    out.certificate = certify_glued(EnergyLevel(out.certified_c), mr, p, cutoff, spec);
    out.certificate.eps_E = out.eps_E;
    return out;
}

} // namespace crtbp
