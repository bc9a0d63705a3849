#include "crtbp/continuation.hpp"

#include "crtbp/core_dynamics.hpp"
#include "crtbp/linalg.hpp"
#include "crtbp/transversality.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace crtbp {

namespace {

// Planar orbits are corrected inside the invariant subspace {q3 = p3 = 0};
// the active coordinate set is fixed by the guess.
struct ShootingProblem {
    MassRatio mu;
    CorrectorSpec spec;
    std::vector<int> active;   // indices into the flat 6-state
    RotatingState anchor;      // phase-condition anchor
    Vec6 anchor_direction;     // X_H at the anchor
    int m;                     // number of segments

    std::size_t dim() const { return active.size(); }
    std::size_t n_unknowns() const { return static_cast<std::size_t>(m) * dim() + 1; }

    RotatingState embed(const std::vector<double>& u, int segment) const {
        Vec6 z = anchor.flat();
        for (std::size_t j = 0; j < dim(); ++j)
            z[static_cast<std::size_t>(active[j])] =
                u[static_cast<std::size_t>(segment) * dim() + j];
        return RotatingState::from_flat(z);
    }

    std::vector<double> residual(const std::vector<double>& u) const {
        const double period = u.back();
        const double dt = period / m;
        std::vector<double> f(static_cast<std::size_t>(m) * dim() + 1, 0.0);
        for (int i = 0; i < m; ++i) {
            const RotatingState zi = embed(u, i);
            const RotatingState zf = advance(zi, mu, dt, spec.step);
            const Vec6 flat = zf.flat();
            const int nxt = (i + 1) % m;
            for (std::size_t j = 0; j < dim(); ++j)
                f[static_cast<std::size_t>(i) * dim() + j] =
                    flat[static_cast<std::size_t>(active[j])] -
                    u[static_cast<std::size_t>(nxt) * dim() + j];
        }
        // Phase condition: orthogonality of the z0 shift to the flow direction.
        double phase = 0.0;
        const Vec6 a = anchor.flat();
        for (std::size_t j = 0; j < dim(); ++j)
            phase += anchor_direction[static_cast<std::size_t>(active[j])] *
                     (u[j] - a[static_cast<std::size_t>(active[j])]);
        f.back() = phase;
        return f;
    }

    // Finite-difference Jacobian, exploiting the block structure: unknown
    // block i only enters residual blocks i (through the flow) and i-1
    // (identically, as -I); the period column is the segment vector field.
    linalg::Matrix jacobian(const std::vector<double>& u,
                            const std::vector<double>& f0) const {
        const std::size_t d = dim();
        const std::size_t rows = static_cast<std::size_t>(m) * d + 1;
        const std::size_t cols = n_unknowns();
        linalg::Matrix jac(rows, cols);

        const double period = u.back();
        const double dt = period / m;
        for (int i = 0; i < m; ++i) {
            const RotatingState zi = embed(u, i);
            for (std::size_t j = 0; j < d; ++j) {
                std::vector<double> up = u;
                const std::size_t col = static_cast<std::size_t>(i) * d + j;
                const double eps = spec.fd_eps * std::max(1.0, std::abs(u[col]));
                up[col] += eps;
                const RotatingState zp = embed(up, i);
                const Vec6 fp = advance(zp, mu, dt, spec.step).flat();
                const Vec6 fb = advance(zi, mu, dt, spec.step).flat();
                for (std::size_t r = 0; r < d; ++r)
                    jac(static_cast<std::size_t>(i) * d + r, col) =
                        (fp[static_cast<std::size_t>(active[r])] -
                         fb[static_cast<std::size_t>(active[r])]) /
                        eps;
            }
            // -I into the next block's rows.
            const int nxt = (i + 1) % m;
            for (std::size_t j = 0; j < d; ++j)
                jac(static_cast<std::size_t>(i) * d + j,
                    static_cast<std::size_t>(nxt) * d + j) -= 1.0;
            // Period column: d(flow over T/m)/dT = X_H(endpoint)/m.
            const RotatingState zf = advance(zi, mu, dt, spec.step);
            const Vec6 xh = hamiltonian_vector_field(zf, mu);
            for (std::size_t r = 0; r < d; ++r)
                jac(static_cast<std::size_t>(i) * d + r, cols - 1) =
                    xh[static_cast<std::size_t>(active[r])] / m;
        }
        for (std::size_t j = 0; j < d; ++j)
            jac(rows - 1, j) = anchor_direction[static_cast<std::size_t>(active[j])];
        (void)f0;
        return jac;
    }
};

double norm_inf(const std::vector<double>& v) {
    double n = 0.0;
    for (double x : v) n = std::max(n, std::abs(x));
    return n;
}

ShootingProblem make_problem(const RotatingState& guess, const MassRatio& mu,
                             const CorrectorSpec& spec) {
    ShootingProblem prob{mu, spec, {}, guess, hamiltonian_vector_field(guess, mu), spec.segments};
    const bool planar = guess.q[2] == 0.0 && guess.p[2] == 0.0;
    prob.active = planar ? std::vector<int>{0, 1, 3, 4} : std::vector<int>{0, 1, 2, 3, 4, 5};
    return prob;
}

std::vector<double> initial_unknowns(const ShootingProblem& prob, const RotatingState& guess,
                                     double period) {
    std::vector<double> u(prob.n_unknowns(), 0.0);
    const double dt = period / prob.m;
    RotatingState z = guess;
    for (int i = 0; i < prob.m; ++i) {
        const Vec6 flat = z.flat();
        for (std::size_t j = 0; j < prob.dim(); ++j)
            u[static_cast<std::size_t>(i) * prob.dim() + j] =
                flat[static_cast<std::size_t>(prob.active[j])];
        if (i + 1 < prob.m) z = advance(z, prob.mu, dt, prob.spec.step);
    }
    u.back() = period;
    return u;
}

PeriodicOrbit finalize_orbit(const ShootingProblem& prob, const std::vector<double>& u,
                             const MassRatio& mu, const CorrectorSpec& spec) {
    PeriodicOrbit orbit;
    orbit.initial = prob.embed(u, 0);
    orbit.period = u.back();
    orbit.planar = prob.dim() == 4;
    orbit.energy = eval_H(orbit.initial, mu);
    const AugmentedFlowResult full =
        integrate_with_quadratures(orbit.initial, mu, orbit.period, spec.step);
    const Vec6 diff = full.state.flat();
    const Vec6 init = orbit.initial.flat();
    double res = 0.0;
    for (int i = 0; i < 6; ++i) {
        const double dd = diff[static_cast<std::size_t>(i)] - init[static_cast<std::size_t>(i)];
        res += dd * dd;
    }
    orbit.closure_residual = std::sqrt(res);
    orbit.action = full.action;
    orbit.length = full.length;
    return orbit;
}

// Newton iteration shared by the corrector and the continuation steppers;
// extra_rows appends constraint rows (energy or arclength) to the system.
struct ExtraConstraint {
    std::function<double(const std::vector<double>&)> value;
    std::function<std::vector<double>(const std::vector<double>&)> gradient;
};

CorrectorResult newton_solve(ShootingProblem& prob, std::vector<double> u,
                             const std::vector<ExtraConstraint>& extras) {
    CorrectorResult result;
    const std::size_t base_rows = prob.n_unknowns();
    for (int it = 0; it < prob.spec.max_iters; ++it) {
        std::vector<double> f = prob.residual(u);
        for (const auto& ex : extras) f.push_back(ex.value(u));
        const double res = norm_inf(f);
        result.residual_history.push_back(res);
        if (res < prob.spec.tol) {
            result.converged = true;
            break;
        }

        linalg::Matrix jac_base = prob.jacobian(u, f);
        linalg::Matrix jac(base_rows + extras.size(), prob.n_unknowns());
        for (std::size_t r = 0; r < base_rows; ++r)
            for (std::size_t c = 0; c < prob.n_unknowns(); ++c) jac(r, c) = jac_base(r, c);
        for (std::size_t e = 0; e < extras.size(); ++e) {
            const std::vector<double> g = extras[e].gradient(u);
            for (std::size_t c = 0; c < prob.n_unknowns(); ++c) jac(base_rows + e, c) = g[c];
        }

        std::vector<double> rhs(f.size());
        for (std::size_t i = 0; i < f.size(); ++i) rhs[i] = -f[i];
        std::vector<double> delta = linalg::qr_least_squares(jac, rhs, 1e-11);

        // Damped update: halve until the residual does not grow.
        double lambda = 1.0;
        std::vector<double> u_try;
        for (int half = 0; half < 6; ++half) {
            u_try = u;
            for (std::size_t i = 0; i < u.size(); ++i) u_try[i] += lambda * delta[i];
            std::vector<double> f_try = prob.residual(u_try);
            for (const auto& ex : extras) f_try.push_back(ex.value(u_try));
            if (norm_inf(f_try) < res || lambda < 0.05) break;
            lambda *= 0.5;
        }
        u = u_try;
        if (!(u.back() > 0.0)) {
            result.message = "corrector drove the period non-positive";
            break;
        }
    }
    if (!result.converged && result.message.empty())
        result.message = "Newton did not reach tolerance";
    result.orbit = finalize_orbit(prob, u, prob.mu, prob.spec);
    return result;
}

} // namespace

CorrectorResult correct_periodic(const RotatingState& guess, double period_guess,
                                 const MassRatio& mu, const CorrectorSpec& spec) {
    if (!(period_guess > 0.0)) throw std::invalid_argument("period guess must be positive");
    ShootingProblem prob = make_problem(guess, mu, spec);
    const std::vector<double> u0 = initial_unknowns(prob, guess, period_guess);
    return newton_solve(prob, u0, {});
}

CorrectorResult kepler_seed_orbit(const MassRatio& mr, double radius, const CorrectorSpec& spec) {
    const double mu = mr.value();
    const double n = std::sqrt(mu / (radius * radius * radius));
    const double vk = std::sqrt(mu / radius);

    // Scan the two-body-limit velocity candidates for the best section return.
    double best_score = 1e300;
    RotatingState best_state;
    double best_period = 0.0;
    for (const double w : {vk + radius, -vk + radius, vk - radius, -vk - radius}) {
        RotatingState s;
        s.q = {radius, 0.0, 0.0};
        // qdot = (0, w, 0) under this flow convention.
        s.p = {0.0, -w + radius - 1.0 + mu, 0.0};

        const double t_rev = 2.0 * kPi / (n + 1.0);
        // Second crossing of the section {q2 = 0} completes one revolution.
        auto section = [](const RotatingState& st) { return st.q[1]; };
        double t1 = 0.0, t2 = 0.0;
        RotatingState s1, s2;
        StepSpec quick = spec.step;
        quick.h = std::min(quick.h, t_rev / 400.0);
        if (!locate_event(advance(s, mr, 0.05 * t_rev, quick), mr, section, 2.5 * t_rev, quick, t1,
                          s1))
            continue;
        if (!locate_event(advance(s1, mr, 0.05 * t_rev, quick), mr, section, 2.5 * t_rev, quick,
                          t2, s2))
            continue;
        const double period = 0.05 * t_rev + t1 + 0.05 * t_rev + t2;
        const Vec6 d0 = s.flat();
        const Vec6 d1 = s2.flat();
        double dist = 0.0;
        for (int i = 0; i < 6; ++i) {
            const double dd = d1[static_cast<std::size_t>(i)] - d0[static_cast<std::size_t>(i)];
            dist += dd * dd;
        }
        dist = std::sqrt(dist);
        if (dist < best_score) {
            best_score = dist;
            best_state = s;
            best_period = period;
        }
    }
    if (!(best_period > 0.0))
        throw std::runtime_error("kepler_seed_orbit: no section return found");
    return correct_periodic(best_state, best_period, mr, spec);
}

OrbitFamily continue_family(const PeriodicOrbit& seed, double energy_target, const MassRatio& mu,
                            const ContinuationSpec& spec) {
    OrbitFamily family;

    ShootingProblem prob = make_problem(seed.initial, mu, spec.corrector);
    std::vector<double> u_prev = initial_unknowns(prob, seed.initial, seed.period);
    {
        CorrectorResult r0 = newton_solve(prob, u_prev, {});
        if (!r0.converged) throw std::runtime_error("continue_family: seed failed to correct");
        u_prev = initial_unknowns(prob, r0.orbit.initial, r0.orbit.period);
        family.members.push_back({r0.orbit, 0.0, 0.0});
    }

    const double dir = energy_target > family.members.front().orbit.energy ? 1.0 : -1.0;

    // Bootstrap a second member with an energy-constrained correction.
    std::vector<double> u_curr;
    {
        ShootingProblem p2 = make_problem(family.members.front().orbit.initial, mu, spec.corrector);
        const double c_goal =
            family.members.front().orbit.energy + dir * spec.initial_energy_step;
        ExtraConstraint energy_row;
        energy_row.value = [&p2, c_goal](const std::vector<double>& u) {
            return eval_H(p2.embed(u, 0), p2.mu) - c_goal;
        };
        energy_row.gradient = [&p2](const std::vector<double>& u) {
            std::vector<double> g(u.size(), 0.0);
            const Vec6 gh = grad_H(p2.embed(u, 0), p2.mu);
            for (std::size_t j = 0; j < p2.dim(); ++j)
                g[j] = gh[static_cast<std::size_t>(p2.active[j])];
            return g;
        };
        CorrectorResult r1 = newton_solve(p2, u_prev, {energy_row});
        if (!r1.converged) throw std::runtime_error("continue_family: bootstrap step failed");
        u_curr = initial_unknowns(p2, r1.orbit.initial, r1.orbit.period);
        family.members.push_back({r1.orbit, 0.0, 0.0});
        prob = make_problem(r1.orbit.initial, mu, spec.corrector);
    }

    std::vector<double> arc{0.0};
    {
        double d2 = 0.0;
        for (std::size_t i = 0; i < u_prev.size(); ++i) {
            const double dd = u_curr[i] - u_prev[i];
            d2 += dd * dd;
        }
        arc.push_back(std::sqrt(d2));
    }

    for (std::size_t stepi = 2; stepi < spec.max_steps; ++stepi) {
        const PeriodicOrbit& last = family.members.back().orbit;
        if ((dir > 0.0 && last.energy >= energy_target) ||
            (dir < 0.0 && last.energy <= energy_target)) {
            family.reached_target = true;
            break;
        }

        // Secant tangent, normalized; predictor step along it.
        std::vector<double> tangent(u_curr.size());
        double tn = 0.0;
        for (std::size_t i = 0; i < u_curr.size(); ++i) {
            tangent[i] = u_curr[i] - u_prev[i];
            tn += tangent[i] * tangent[i];
        }
        tn = std::sqrt(tn);
        if (!(tn > 0.0)) break;
        for (auto& v : tangent) v /= tn;

        const double ds = spec.arclength_step;
        std::vector<double> u_pred = u_curr;
        for (std::size_t i = 0; i < u_pred.size(); ++i) u_pred[i] += ds * tangent[i];

        ShootingProblem ps = make_problem(prob.embed(u_pred, 0), mu, spec.corrector);
        ExtraConstraint arc_row;
        arc_row.value = [&u_pred, &tangent, ds](const std::vector<double>& u) {
            double v = 0.0;
            for (std::size_t i = 0; i < u.size(); ++i) v += (u[i] - u_pred[i]) * tangent[i];
            return v;
        };
        arc_row.gradient = [&tangent](const std::vector<double>&) { return tangent; };

        CorrectorResult rc = newton_solve(ps, u_pred, {arc_row});
        if (!rc.converged) break;

        const std::vector<double> u_new =
            initial_unknowns(ps, rc.orbit.initial, rc.orbit.period);

        // Fold: the energy direction reverses.
        const double dc_prev = family.members.back().orbit.energy -
                               family.members[family.members.size() - 2].orbit.energy;
        const double dc_new = rc.orbit.energy - family.members.back().orbit.energy;
        if (dc_prev * dc_new < 0.0) family.fold_indices.push_back(family.members.size());

        double d2 = 0.0;
        for (std::size_t i = 0; i < u_new.size(); ++i) {
            const double dd = u_new[i] - u_curr[i];
            d2 += dd * dd;
        }
        arc.push_back(arc.back() + std::sqrt(d2));
        u_prev = u_curr;
        u_curr = u_new;
        family.members.push_back({rc.orbit, 0.0, 0.0});
    }

    // Normalize the continuation parameter and measure the log-period rate.
    const double total = arc.back() > 0.0 ? arc.back() : 1.0;
    for (std::size_t i = 0; i < family.members.size(); ++i)
        family.members[i].r = arc[std::min(i, arc.size() - 1)] / total;
    double kmax = 0.0;
    for (std::size_t i = 1; i < family.members.size(); ++i) {
        const double dr = family.members[i].r - family.members[i - 1].r;
        if (dr <= 0.0) continue;
        const double kl = std::abs(std::log(family.members[i].orbit.period /
                                            family.members[i - 1].orbit.period)) /
                          dr;
        family.members[i].k_local = kl;
        kmax = std::max(kmax, kl);
    }
    // Slack makes the strict two-sided bound hold at the arg-max pair.
    family.k_estimate = kmax * (1.0 + 1e-9) + 1e-12;
    return family;
}

ActionResult rabinowitz_action(const PeriodicOrbit& orbit, const MassRatio& mu,
                               const StepSpec& step) {
    ActionResult out;
    const AugmentedFlowResult aug =
        integrate_with_quadratures(orbit.initial, mu, orbit.period, step);
    out.action = aug.action;
    out.reeb_time = aug.reeb_time;

    // Pointwise integrand lambda(X_H) = -dH(X) along the orbit.
    const int n_nodes = 256;
    out.integrand.reserve(n_nodes);
    RotatingState s = orbit.initial;
    bool positive = false, negative = false;
    for (int i = 0; i < n_nodes; ++i) {
        const double lam = -x_of_h(s, mu);
        out.integrand.push_back(lam);
        if (lam > 0.0) positive = true;
        if (lam < 0.0) negative = true;
        s = advance(s, mu, orbit.period / n_nodes, step);
    }
    out.constant_sign = positive != negative;
    return out;
}

BlueSkyReport blue_sky_monitor(const OrbitFamily& family, const BlueSkyConfig& cfg) {
    BlueSkyReport rep;
    if (family.members.empty()) return rep;
    rep.k_estimate = family.k_estimate;

    double tau_min = 1e300, tau_max = 0.0, len_min = 1e300, len_max = 0.0;
    for (const auto& m : family.members) {
        tau_min = std::min(tau_min, m.orbit.period);
        tau_max = std::max(tau_max, m.orbit.period);
        len_min = std::min(len_min, m.orbit.length);
        len_max = std::max(len_max, m.orbit.length);
    }
    rep.max_period_ratio = tau_max / tau_min;
    rep.max_length_ratio = len_max > 0.0 && len_min > 0.0 ? len_max / len_min : 1.0;

    if (rep.max_period_ratio > cfg.growth_factor) {
        rep.flagged = true;
        rep.reason = "period grows beyond the configured factor";
    } else if (rep.max_length_ratio > cfg.growth_factor) {
        rep.flagged = true;
        rep.reason = "orbit length grows beyond the configured factor";
    }
    return rep;
}

} // namespace crtbp
