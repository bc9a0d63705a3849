#include "crtbp/flow.hpp"

#include "crtbp/core_dynamics.hpp"
#include "crtbp/transversality.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace crtbp {

namespace {

struct GaussTableau {
    int s;
    std::array<std::array<double, 3>, 3> a;
    std::array<double, 3> b;
};

const GaussTableau& tableau(int stages) {
    static const GaussTableau g2 = {2,
                                    {{{0.25, 0.25 - std::sqrt(3.0) / 6.0, 0.0},
                                      {0.25 + std::sqrt(3.0) / 6.0, 0.25, 0.0},
                                      {0.0, 0.0, 0.0}}},
                                    {0.5, 0.5, 0.0}};
    static const double r15 = std::sqrt(15.0);
    static const GaussTableau g3 = {3,
                                    {{{5.0 / 36.0, 2.0 / 9.0 - r15 / 15.0, 5.0 / 36.0 - r15 / 30.0},
                                      {5.0 / 36.0 + r15 / 24.0, 2.0 / 9.0, 5.0 / 36.0 - r15 / 24.0},
                                      {5.0 / 36.0 + r15 / 30.0, 2.0 / 9.0 + r15 / 15.0, 5.0 / 36.0}}},
                                    {5.0 / 18.0, 4.0 / 9.0, 5.0 / 18.0}};
    if (stages == 2) return g2;
    if (stages == 3) return g3;
    throw std::invalid_argument("StepSpec.stages must be 2 or 3");
}

/// One Gauss step for a vector field on R^N. Returns the worst stage
/// increment change of the final fixed-point sweep (convergence measure).
template <std::size_t N, typename Rhs>
double gauss_step(std::array<double, N>& y, double h, const Rhs& rhs, const StepSpec& spec) {
    const GaussTableau& tb = tableau(spec.stages);
    const int s = tb.s;

    std::array<std::array<double, N>, 3> k{};
    std::array<double, N> f0{};
    rhs(y, f0);
    for (int i = 0; i < s; ++i) k[static_cast<std::size_t>(i)] = f0;

    double delta = 1e300;
    std::array<double, N> stage{};
    std::array<std::array<double, N>, 3> knew{};
    for (int it = 0; it < spec.max_fp_iters; ++it) {
        delta = 0.0;
        for (int i = 0; i < s; ++i) {
            for (std::size_t n = 0; n < N; ++n) {
                double acc = 0.0;
                for (int j = 0; j < s; ++j)
                    acc += tb.a[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] *
                           k[static_cast<std::size_t>(j)][n];
                stage[n] = y[n] + h * acc;
            }
            rhs(stage, knew[static_cast<std::size_t>(i)]);
        }
        for (int i = 0; i < s; ++i)
            for (std::size_t n = 0; n < N; ++n) {
                delta = std::max(delta, std::abs(knew[static_cast<std::size_t>(i)][n] -
                                                 k[static_cast<std::size_t>(i)][n]) * std::abs(h));
                k[static_cast<std::size_t>(i)][n] = knew[static_cast<std::size_t>(i)][n];
            }
        if (delta < spec.fp_tol) break;
    }

    for (std::size_t n = 0; n < N; ++n) {
        double acc = 0.0;
        for (int i = 0; i < s; ++i) acc += tb.b[static_cast<std::size_t>(i)] * k[static_cast<std::size_t>(i)][n];
        y[n] += h * acc;
    }
    return delta;
}

struct RotatingRhs {
    double mu;
    void operator()(const Vec6& z, Vec6& out) const {
        const double x = z[0], y = z[1], w = z[2];
        const double p1 = z[3], p2 = z[4], p3 = z[5];
        const double rm2 = x * x + y * y + w * w;
        const double xe = x - 1.0;
        const double re2 = xe * xe + y * y + w * w;
        const double im3 = mu / (rm2 * std::sqrt(rm2));
        const double ie3 = (1.0 - mu) / (re2 * std::sqrt(re2));
        // qdot = -dH/dp, pdot = +dH/dq
        out[0] = -(p1 + y);
        out[1] = -(p2 - (x - 1.0 + mu));
        out[2] = -p3;
        out[3] = im3 * x + ie3 * xe - p2;
        out[4] = (im3 + ie3) * y + p1;
        out[5] = (im3 + ie3) * w;
    }
};

// Regularized chart: state (xi, eta, t). The ambient Hamiltonian field of Q
// is corrected by the multipliers that keep |xi| = 1 and <xi, eta> = 0
// invariant; physical time rides along as dt = mu (1 - xi0)|eta| dsigma.
struct RegularizedRhs {
    RegularizedLevel level;
    void operator()(const std::array<double, 9>& z, std::array<double, 9>& out) const {
        RegularizedState s;
        for (int i = 0; i < 4; ++i) {
            s.xi[static_cast<std::size_t>(i)] = z[static_cast<std::size_t>(i)];
            s.eta[static_cast<std::size_t>(i)] = z[static_cast<std::size_t>(i + 4)];
        }
        const Vec8 g = grad_Q_reg(s, level);
        Vec4 q_xi{g[0], g[1], g[2], g[3]};
        Vec4 q_eta{g[4], g[5], g[6], g[7]};
        const double xi2 = dot(s.xi, s.xi);
        const double lam2 = -dot(s.xi, q_eta) / xi2;
        const double lam1 = (dot(s.eta, q_eta) - dot(s.xi, q_xi)) / xi2;
        for (int i = 0; i < 4; ++i) {
            out[static_cast<std::size_t>(i)] =
                -q_eta[static_cast<std::size_t>(i)] - lam2 * s.xi[static_cast<std::size_t>(i)];
            out[static_cast<std::size_t>(i + 4)] = q_xi[static_cast<std::size_t>(i)] +
                                                   lam1 * s.xi[static_cast<std::size_t>(i)] +
                                                   lam2 * s.eta[static_cast<std::size_t>(i)];
        }
        out[8] = level.mu * (1.0 - s.xi[0]) * norm(s.eta);
    }
};

} // namespace

Trajectory integrate_unregularized(const RotatingState& s0, const MassRatio& mu, double t_final,
                                   const StepSpec& step, const FlowOptions& opt) {
    Trajectory traj;
    const RotatingRhs rhs{mu.value()};
    const double h = t_final >= 0.0 ? step.h : -step.h;
    const std::size_t n_steps =
        static_cast<std::size_t>(std::ceil(std::abs(t_final) / step.h - 1e-12));

    Vec6 z = s0.flat();
    const double h0 = eval_H(s0, mu);
    double t = 0.0;

    auto record = [&](double time, const Vec6& state) {
        TrajectorySample smp;
        smp.t = time;
        smp.s = time;
        for (int i = 0; i < 6; ++i) smp.state[static_cast<std::size_t>(i)] = state[static_cast<std::size_t>(i)];
        smp.chart = Chart::Rotating;
        smp.invariant = eval_H(RotatingState::from_flat(state), mu);
        traj.invariant_drift = std::max(traj.invariant_drift, std::abs(smp.invariant - h0));
        traj.samples.push_back(smp);
    };
    record(0.0, z);

    auto close_approach = [&](const Vec6& state) -> int {
        const double rm = std::sqrt(state[0] * state[0] + state[1] * state[1] + state[2] * state[2]);
        const double xe = state[0] - 1.0;
        const double re = std::sqrt(xe * xe + state[1] * state[1] + state[2] * state[2]);
        if (rm < opt.switch_threshold) return 1;
        if (re < opt.switch_threshold) return 2;
        return 0;
    };

    for (std::size_t n = 0; n < n_steps; ++n) {
        const double h_this = (n + 1 == n_steps) ? (t_final - t) : h;
        Vec6 znew = z;
        gauss_step(znew, h_this, rhs, step);

        if (opt.abort_on_close_approach && close_approach(znew) != 0) {
            // Bisect the step size to land on the threshold crossing.
            double lo = 0.0, hi = h_this;
            Vec6 zev = znew;
            for (int it = 0; it < 60; ++it) {
                const double mid = 0.5 * (lo + hi);
                Vec6 ztry = z;
                gauss_step(ztry, mid, rhs, step);
                if (close_approach(ztry) != 0) {
                    hi = mid;
                    zev = ztry;
                } else {
                    lo = mid;
                }
                if (hi - lo < 1e-14 * std::max(1.0, std::abs(h_this))) break;
            }
            t += hi;
            record(t, zev);
            traj.status = close_approach(zev) == 2 ? FlowStatus::CloseApproachEarth
                                                   : FlowStatus::CloseApproachMoon;
            return traj;
        }

        z = znew;
        t += h_this;
        if ((n + 1) % opt.sample_stride == 0 || n + 1 == n_steps) record(t, z);
    }
    return traj;
}

RotatingState advance(const RotatingState& s0, const MassRatio& mu, double t, const StepSpec& step) {
    FlowOptions opt;
    opt.sample_stride = std::numeric_limits<std::size_t>::max();
    opt.abort_on_close_approach = false;
    const Trajectory traj = integrate_unregularized(s0, mu, t, step, opt);
    return RotatingState::from_flat({traj.samples.back().state[0], traj.samples.back().state[1],
                                     traj.samples.back().state[2], traj.samples.back().state[3],
                                     traj.samples.back().state[4], traj.samples.back().state[5]});
}

Trajectory integrate_regularized(const RegularizedState& s0, const EnergyLevel& c,
                                 const MassRatio& mu, double s_final, const StepSpec& step,
                                 const FlowOptions& opt) {
    Trajectory traj;
    const RegularizedLevel level(mu, c);
    const RegularizedRhs rhs{level};
    const double h = s_final >= 0.0 ? step.h : -step.h;
    const std::size_t n_steps =
        static_cast<std::size_t>(std::ceil(std::abs(s_final) / step.h - 1e-12));

    std::array<double, 9> z{};
    for (int i = 0; i < 4; ++i) {
        z[static_cast<std::size_t>(i)] = s0.xi[static_cast<std::size_t>(i)];
        z[static_cast<std::size_t>(i + 4)] = s0.eta[static_cast<std::size_t>(i)];
    }
    const double q0 = eval_Q_reg(s0, level);
    double sparam = 0.0;

    auto state_of = [](const std::array<double, 9>& zz) {
        RegularizedState rs;
        for (int i = 0; i < 4; ++i) {
            rs.xi[static_cast<std::size_t>(i)] = zz[static_cast<std::size_t>(i)];
            rs.eta[static_cast<std::size_t>(i)] = zz[static_cast<std::size_t>(i + 4)];
        }
        return rs;
    };

    auto record = [&](double sp, const std::array<double, 9>& zz) {
        const RegularizedState rs = state_of(zz);
        TrajectorySample smp;
        smp.t = zz[8];
        smp.s = sp;
        for (int i = 0; i < 8; ++i) smp.state[static_cast<std::size_t>(i)] = zz[static_cast<std::size_t>(i)];
        smp.chart = Chart::Regularized;
        smp.invariant = eval_Q_reg(rs, level);
        smp.constraint_residual = std::max(rs.xi_norm_residual(), rs.tangency_residual());
        traj.invariant_drift = std::max(traj.invariant_drift, std::abs(smp.invariant - q0));
        traj.max_constraint_residual =
            std::max(traj.max_constraint_residual, smp.constraint_residual);
        traj.samples.push_back(smp);
    };
    record(0.0, z);

    for (std::size_t n = 0; n < n_steps; ++n) {
        const double h_this = (n + 1 == n_steps) ? (s_final - sparam) : h;
        gauss_step(z, h_this, rhs, step);
        sparam += h_this;

        // Constraint projection; the correction magnitude is a health metric.
        RegularizedState rs = state_of(z);
        const RegularizedState proj = project_to_constraints(rs);
        double corr = 0.0;
        for (int i = 0; i < 4; ++i) {
            corr = std::max(corr, std::abs(proj.xi[static_cast<std::size_t>(i)] - rs.xi[static_cast<std::size_t>(i)]));
            corr = std::max(corr, std::abs(proj.eta[static_cast<std::size_t>(i)] - rs.eta[static_cast<std::size_t>(i)]));
            z[static_cast<std::size_t>(i)] = proj.xi[static_cast<std::size_t>(i)];
            z[static_cast<std::size_t>(i + 4)] = proj.eta[static_cast<std::size_t>(i)];
        }
        traj.max_projection_correction = std::max(traj.max_projection_correction, corr);

        if (opt.abort_on_close_approach) {
            // Earth singularity in the Moon chart: |w| = |q - E| small.
            const RegularizedState cur = state_of(z);
            const double om = 1.0 - cur.xi[0];
            const Vec3 w{om * cur.eta[1] + cur.eta[0] * cur.xi[1] - 1.0,
                         om * cur.eta[2] + cur.eta[0] * cur.xi[2],
                         om * cur.eta[3] + cur.eta[0] * cur.xi[3]};
            if (norm(w) < opt.switch_threshold) {
                record(sparam, z);
                traj.status = FlowStatus::CloseApproachEarth;
                return traj;
            }
        }

        if ((n + 1) % opt.sample_stride == 0 || n + 1 == n_steps) record(sparam, z);
    }
    return traj;
}

RegularizedState advance_regularized_to_time(const RegularizedState& s0, const EnergyLevel& c,
                                             const MassRatio& mu, double t_target,
                                             const StepSpec& step) {
    const RegularizedLevel level(mu, c);
    const RegularizedRhs rhs{level};
    std::array<double, 9> z{};
    for (int i = 0; i < 4; ++i) {
        z[static_cast<std::size_t>(i)] = s0.xi[static_cast<std::size_t>(i)];
        z[static_cast<std::size_t>(i + 4)] = s0.eta[static_cast<std::size_t>(i)];
    }

    auto project = [&](std::array<double, 9>& zz) {
        RegularizedState rs;
        for (int i = 0; i < 4; ++i) {
            rs.xi[static_cast<std::size_t>(i)] = zz[static_cast<std::size_t>(i)];
            rs.eta[static_cast<std::size_t>(i)] = zz[static_cast<std::size_t>(i + 4)];
        }
        const RegularizedState proj = project_to_constraints(rs);
        for (int i = 0; i < 4; ++i) {
            zz[static_cast<std::size_t>(i)] = proj.xi[static_cast<std::size_t>(i)];
            zz[static_cast<std::size_t>(i + 4)] = proj.eta[static_cast<std::size_t>(i)];
        }
    };

    for (std::size_t guard = 0; guard < 100000000; ++guard) {
        std::array<double, 9> znew = z;
        gauss_step(znew, step.h, rhs, step);
        if (znew[8] >= t_target) {
            // Bisect the final step size to land on t = t_target.
            double lo = 0.0, hi = step.h;
            std::array<double, 9> zend = znew;
            for (int it = 0; it < 80; ++it) {
                const double mid = 0.5 * (lo + hi);
                std::array<double, 9> ztry = z;
                gauss_step(ztry, mid, rhs, step);
                if (ztry[8] >= t_target) {
                    hi = mid;
                    zend = ztry;
                } else {
                    lo = mid;
                }
                if (std::abs(zend[8] - t_target) < 1e-14 * std::max(1.0, t_target)) break;
            }
            project(zend);
            RegularizedState out;
            for (int i = 0; i < 4; ++i) {
                out.xi[static_cast<std::size_t>(i)] = zend[static_cast<std::size_t>(i)];
                out.eta[static_cast<std::size_t>(i)] = zend[static_cast<std::size_t>(i + 4)];
            }
            return out;
        }
        z = znew;
        project(z);
    }
    throw std::runtime_error("advance_regularized_to_time: target time not reached");
}

AugmentedFlowResult integrate_with_quadratures(const RotatingState& s0, const MassRatio& mu,
                                               double t_final, const StepSpec& step) {
    struct Rhs {
        double mu;
        void operator()(const std::array<double, 9>& z, std::array<double, 9>& out) const {
            const RotatingRhs base{mu};
            Vec6 zz{z[0], z[1], z[2], z[3], z[4], z[5]};
            Vec6 d{};
            base(zz, d);
            for (int i = 0; i < 6; ++i) out[static_cast<std::size_t>(i)] = d[static_cast<std::size_t>(i)];
            const RotatingState st = RotatingState::from_flat(zz);
            const double lam = -x_of_h(st, MassRatio(mu)); // lambda(X_H) = -dH(X)
            out[6] = lam;
            out[7] = std::sqrt(d[0] * d[0] + d[1] * d[1] + d[2] * d[2]);
            out[8] = std::abs(lam);
        }
    };
    const Rhs rhs{mu.value()};
    std::array<double, 9> z{};
    const Vec6 f = s0.flat();
    for (int i = 0; i < 6; ++i) z[static_cast<std::size_t>(i)] = f[static_cast<std::size_t>(i)];

    const double h = t_final >= 0.0 ? step.h : -step.h;
    const std::size_t n_steps =
        static_cast<std::size_t>(std::ceil(std::abs(t_final) / step.h - 1e-12));
    double t = 0.0;
    for (std::size_t n = 0; n < n_steps; ++n) {
        const double h_this = (n + 1 == n_steps) ? (t_final - t) : h;
        gauss_step(z, h_this, rhs, step);
        t += h_this;
    }
    AugmentedFlowResult out;
    out.state = RotatingState::from_flat({z[0], z[1], z[2], z[3], z[4], z[5]});
    out.action = z[6];
    out.length = z[7];
    out.reeb_time = z[8];
    return out;
}

RotatingState advance_reeb_rescaled(const RotatingState& s0, const MassRatio& mu, double tau,
                                    const StepSpec& step) {
    struct Rhs {
        double mu;
        void operator()(const Vec6& z, Vec6& out) const {
            const RotatingRhs base{mu};
            base(z, out);
            const double lam = std::abs(x_of_h(RotatingState::from_flat(z), MassRatio(mu)));
            for (auto& v : out) v /= lam;
        }
    };
    const Rhs rhs{mu.value()};
    Vec6 z = s0.flat();
    const double h = tau >= 0.0 ? step.h : -step.h;
    const std::size_t n_steps = static_cast<std::size_t>(std::ceil(std::abs(tau) / step.h - 1e-12));
    double t = 0.0;
    for (std::size_t n = 0; n < n_steps; ++n) {
        const double h_this = (n + 1 == n_steps) ? (tau - t) : h;
        gauss_step(z, h_this, rhs, step);
        t += h_this;
    }
    return RotatingState::from_flat(z);
}

RegularizedState switch_chart_to_regularized(const RotatingState& s) { return regularize(s); }

RotatingState switch_chart_to_rotating(const RegularizedState& s) { return unregularize(s); }

double reconstruct_H(const RegularizedState& s, const RegularizedLevel& level) {
    const double f = eval_f(s, level);
    const double ae = norm(s.eta);
    const double ynorm = (1.0 - s.xi[0]) * ae;
    if (ynorm < 1e-300) throw std::domain_error("reconstruct_H: collision point, H undefined");
    return level.c + (ae * f - level.mu) / ynorm;
}

bool locate_event(const RotatingState& s0, const MassRatio& mu,
                  const std::function<double(const RotatingState&)>& event, double t_max,
                  const StepSpec& step, double& t_event, RotatingState& state_event, double tol) {
    const RotatingRhs rhs{mu.value()};
    Vec6 z = s0.flat();
    double t = 0.0;
    double g0 = event(s0);
    const std::size_t n_steps = static_cast<std::size_t>(std::ceil(t_max / step.h));
    for (std::size_t n = 0; n < n_steps; ++n) {
        const double h_this = std::min(step.h, t_max - t);
        if (h_this <= 0.0) break;
        Vec6 znew = z;
        gauss_step(znew, h_this, rhs, step);
        const double g1 = event(RotatingState::from_flat(znew));
        if ((g0 < 0.0) != (g1 < 0.0)) {
            double lo = 0.0, hi = h_this;
            Vec6 zev = znew;
            for (int it = 0; it < 100; ++it) {
                const double mid = 0.5 * (lo + hi);
                Vec6 ztry = z;
                gauss_step(ztry, mid, rhs, step);
                const double gm = event(RotatingState::from_flat(ztry));
                if ((gm < 0.0) == (g0 < 0.0)) {
                    lo = mid;
                } else {
                    hi = mid;
                    zev = ztry;
                }
                if (std::abs(gm) < tol) {
                    zev = ztry;
                    hi = mid;
                    break;
                }
            }
            t_event = t + hi;
            state_event = RotatingState::from_flat(zev);
            return true;
        }
        z = znew;
        t += h_this;
        g0 = g1;
    }
    return false;
}

RotatingState advance_rk4(const RotatingState& s0, const MassRatio& mu, double t, double h) {
    const RotatingRhs rhs{mu.value()};
    Vec6 z = s0.flat();
    const double hs = t >= 0.0 ? h : -h;
    const std::size_t n_steps = static_cast<std::size_t>(std::ceil(std::abs(t) / h - 1e-12));
    double tt = 0.0;
    auto add = [](const Vec6& a, double s, const Vec6& b) {
        Vec6 r;
        for (int i = 0; i < 6; ++i) r[static_cast<std::size_t>(i)] = a[static_cast<std::size_t>(i)] + s * b[static_cast<std::size_t>(i)];
        return r;
    };
    for (std::size_t n = 0; n < n_steps; ++n) {
        const double hh = (n + 1 == n_steps) ? (t - tt) : hs;
        Vec6 k1, k2, k3, k4;
        rhs(z, k1);
        rhs(add(z, 0.5 * hh, k1), k2);
        rhs(add(z, 0.5 * hh, k2), k3);
        rhs(add(z, hh, k3), k4);
        for (int i = 0; i < 6; ++i)
            z[static_cast<std::size_t>(i)] += hh / 6.0 *
                (k1[static_cast<std::size_t>(i)] + 2.0 * k2[static_cast<std::size_t>(i)] +
                 2.0 * k3[static_cast<std::size_t>(i)] + k4[static_cast<std::size_t>(i)]);
        tt += hh;
    }
    return RotatingState::from_flat(z);
}

} // namespace crtbp
