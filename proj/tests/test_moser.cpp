#include <doctest.h>

#include "crtbp/core_dynamics.hpp"
#include "crtbp/io.hpp"
#include "crtbp/moser.hpp"
#include "crtbp/rng.hpp"

#include <cmath>
#include <sstream>

using namespace crtbp;

namespace {

RotatingState on_shell_near_moon(Rng& rng, double mu, double c, double rmax) {
    Vec3 q = rng.ball_point(rmax);
    double u = eval_U(q, MassRatio(mu));
    while (u > c) {
        q = rng.ball_point(rmax);
        u = eval_U(q, MassRatio(mu));
    }
    const Vec3 v = std::sqrt(2.0 * (c - u)) * rng.unit_vec3();
    return {q, {v[0] - q[1], v[1] + q[0] - 1.0 + mu, v[2]}};
}

} // namespace

TEST_CASE("switch map and its inverse") {
    Rng rng(1);
    for (int i = 0; i < 1000; ++i) {
        RotatingState s;
        s.q = {rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)};
        s.p = {rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)};
        const RotatingState rt = switch_map_inverse(switch_map(s));
        for (int k = 0; k < 3; ++k) {
            CHECK(rt.q[static_cast<std::size_t>(k)] == s.q[static_cast<std::size_t>(k)]);
            CHECK(rt.p[static_cast<std::size_t>(k)] == s.p[static_cast<std::size_t>(k)]);
        }
    }
}

TEST_CASE("stereographic chart at the displayed reference points") {
    const RegularizedState a = to_regularized({{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}});
    CHECK(a.xi[0] == doctest::Approx(0.0));
    CHECK(a.xi[1] == doctest::Approx(1.0));
    CHECK(a.eta[2] == doctest::Approx(1.0));
    CHECK(std::abs(a.eta[0]) < 1e-15);
    CHECK(norm(a.eta) == doctest::Approx(1.0)); // |eta| = |y|/(1 - xi0) = 1

    // x = 0 maps to the south pole with eta = (0, y/2).
    const RegularizedState b = to_regularized({{0.0, 0.0, 0.0}, {0.4, -0.2, 0.6}});
    CHECK(b.xi[0] == doctest::Approx(-1.0));
    CHECK(b.eta[0] == doctest::Approx(0.0));
    CHECK(b.eta[1] == doctest::Approx(0.2));
    CHECK(b.eta[2] == doctest::Approx(-0.1));
    CHECK(b.eta[3] == doctest::Approx(0.3));
}

TEST_CASE("chart round trips, constraints and the eta relation") {
    Rng rng(2);
    for (int i = 0; i < 20000; ++i) {
        SwitchedState s;
        s.x = {rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)};
        s.y = {rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)};
        const RegularizedState r = to_regularized(s);
        CHECK(r.xi_norm_residual() < 1e-12);
        CHECK(r.tangency_residual() < 1e-12);
        const double x2 = dot(s.x, s.x);
        CHECK(std::abs(norm(r.eta) - 0.5 * (x2 + 1.0) * norm(s.y)) < 1e-12 * (1.0 + x2));
        CHECK(std::abs(norm(r.eta) - norm(s.y) / (1.0 - r.xi[0])) < 1e-10);
        const SwitchedState back = from_regularized(r);
        for (int k = 0; k < 3; ++k) {
            CHECK(std::abs(back.x[static_cast<std::size_t>(k)] - s.x[static_cast<std::size_t>(k)]) < 1e-12);
            CHECK(std::abs(back.y[static_cast<std::size_t>(k)] - s.y[static_cast<std::size_t>(k)]) < 1e-12);
        }
    }
}

TEST_CASE("the added point xi0 = 1 has no finite preimage") {
    RegularizedState pole;
    pole.xi = {1.0, 0.0, 0.0, 0.0};
    pole.eta = {0.0, 0.3, 0.0, 0.0};
    CHECK_THROWS_AS(from_regularized(pole), std::domain_error);
}

TEST_CASE("the chart is symplectic: pullback of deta^dxi is dy^dx") {
    Rng rng(3);
    const double h = 1e-6;
    for (int trial = 0; trial < 200; ++trial) {
        SwitchedState s;
        s.x = {rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5)};
        s.y = {rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5)};

        // Two random tangent vectors (dx, dy) in R^6.
        std::array<double, 6> v1{}, v2{};
        for (auto& v : v1) v = rng.uniform(-1, 1);
        for (auto& v : v2) v = rng.uniform(-1, 1);

        auto push = [&](const std::array<double, 6>& v) {
            SwitchedState sp = s, sm = s;
            for (int k = 0; k < 3; ++k) {
                sp.x[static_cast<std::size_t>(k)] += h * v[static_cast<std::size_t>(k)];
                sp.y[static_cast<std::size_t>(k)] += h * v[static_cast<std::size_t>(k + 3)];
                sm.x[static_cast<std::size_t>(k)] -= h * v[static_cast<std::size_t>(k)];
                sm.y[static_cast<std::size_t>(k)] -= h * v[static_cast<std::size_t>(k + 3)];
            }
            const RegularizedState rp = to_regularized(sp);
            const RegularizedState rm = to_regularized(sm);
            std::array<double, 8> d{};
            for (int k = 0; k < 4; ++k) {
                d[static_cast<std::size_t>(k)] =
                    (rp.xi[static_cast<std::size_t>(k)] - rm.xi[static_cast<std::size_t>(k)]) / (2 * h);
                d[static_cast<std::size_t>(k + 4)] =
                    (rp.eta[static_cast<std::size_t>(k)] - rm.eta[static_cast<std::size_t>(k)]) / (2 * h);
            }
            return d;
        };
        const auto p1 = push(v1);
        const auto p2 = push(v2);

        double omega_reg = 0.0; // sum deta_k ^ dxi_k
        for (int k = 0; k < 4; ++k)
            omega_reg += p1[static_cast<std::size_t>(k + 4)] * p2[static_cast<std::size_t>(k)] -
                         p2[static_cast<std::size_t>(k + 4)] * p1[static_cast<std::size_t>(k)];
        double omega_xy = 0.0; // sum dy_k ^ dx_k
        for (int k = 0; k < 3; ++k)
            omega_xy += v1[static_cast<std::size_t>(k + 3)] * v2[static_cast<std::size_t>(k)] -
                        v2[static_cast<std::size_t>(k + 3)] * v1[static_cast<std::size_t>(k)];
        CHECK(std::abs(omega_reg - omega_xy) < 1e-8 * std::max(1.0, std::abs(omega_xy)));
    }
}

TEST_CASE("f at the south pole reduces to the displayed expression") {
    const MassRatio mu(0.3);
    const RegularizedLevel level(mu, EnergyLevel(-2.0));
    Rng rng(4);
    for (int i = 0; i < 500; ++i) {
        RegularizedState s;
        s.xi = {-1.0, 0.0, 0.0, 0.0};
        s.eta = {0.0, rng.uniform(-1, 1), rng.uniform(-1, 1), rng.uniform(-1, 1)};
        const Vec3 w{2.0 * s.eta[1] - 1.0, 2.0 * s.eta[2], 2.0 * s.eta[3]};
        const double expected =
            1.0 - 2.0 * (1.0 - 0.3) / norm(w) - 2.0 * (level.c + 0.5);
        CHECK(eval_f(s, level) == doctest::Approx(expected).epsilon(1e-13));
    }
}

TEST_CASE("on-shell states land on the level set mu^2/2 with the chart bounds") {
    const MassRatio mu(0.5);
    const double c = -2.2;
    const RegularizedLevel level(mu, EnergyLevel(c));
    Rng rng(6);
    for (int i = 0; i < 20000; ++i) {
        const RotatingState st = on_shell_near_moon(rng, 0.5, c, 0.05);
        const RegularizedState rs = regularize(st);
        CHECK(std::abs(eval_Q_reg(rs, level) - 0.125) < 1e-10);
        CHECK(std::abs(eval_f(rs, level)) >= 0.25); // mu/2
        CHECK(norm(rs.eta) <= 2.0);
        CHECK(x_of_q(rs, level) > 0.0);
    }
}

TEST_CASE("analytic gradients of f and Q match finite differences") {
    const MassRatio mu(0.4);
    const RegularizedLevel level(mu, EnergyLevel(-2.1));
    Rng rng(8);
    const double h = 1e-6;
    for (int trial = 0; trial < 300; ++trial) {
        RegularizedState s;
        s.xi = rng.unit_vec4();
        if (1.0 - s.xi[0] < 0.05) s.xi = {-s.xi[0], s.xi[1], s.xi[2], s.xi[3]};
        for (auto& v : s.eta) v = rng.uniform(-1.5, 1.5);

        const Vec8 gf = grad_f(s, level);
        const Vec8 gq = grad_Q_reg(s, level);
        for (int k = 0; k < 8; ++k) {
            auto feval = [&](double x) {
                RegularizedState t = s;
                if (k < 4)
                    t.xi[static_cast<std::size_t>(k)] = x;
                else
                    t.eta[static_cast<std::size_t>(k - 4)] = x;
                return eval_f(t, level);
            };
            auto qeval = [&](double x) {
                RegularizedState t = s;
                if (k < 4)
                    t.xi[static_cast<std::size_t>(k)] = x;
                else
                    t.eta[static_cast<std::size_t>(k - 4)] = x;
                return eval_Q_reg(t, level);
            };
            const double base = k < 4 ? s.xi[static_cast<std::size_t>(k)]
                                      : s.eta[static_cast<std::size_t>(k - 4)];
            const double fdf = (feval(base + h) - feval(base - h)) / (2 * h);
            const double fdq = (qeval(base + h) - qeval(base - h)) / (2 * h);
            CHECK(std::abs(fdf - gf[static_cast<std::size_t>(k)]) <
                  1e-6 * std::max(1.0, std::abs(gf[static_cast<std::size_t>(k)])));
            CHECK(std::abs(fdq - gq[static_cast<std::size_t>(k)]) <
                  1e-6 * std::max(1.0, std::abs(gq[static_cast<std::size_t>(k)])));
        }

        // eta . df/deta assembled from the gradient.
        const double direct = eta_dot_deta_f(s, level);
        double manual = 0.0;
        for (int k = 0; k < 4; ++k)
            manual += s.eta[static_cast<std::size_t>(k)] * gf[static_cast<std::size_t>(k + 4)];
        CHECK(direct == doctest::Approx(manual).epsilon(1e-14));
    }
}

TEST_CASE("X(Q) respects the measured-constant lower bound on the chart") {
    const MassRatio mu(0.5);
    const double c = -2.2, eps = 0.05;
    const RegularizedLevel level(mu, EnergyLevel(c));
    Rng rng(10);
    // First pass measures C, second pass asserts the bound per sample.
    std::vector<RegularizedState> states;
    double C = 0.0;
    for (int i = 0; i < 5000; ++i) {
        const RotatingState st = on_shell_near_moon(rng, 0.5, c, eps);
        const RegularizedState rs = regularize(st);
        states.push_back(rs);
        const double om = 1.0 - rs.xi[0];
        C = std::max(C, earth_term_eta_gradient_norm(rs, level) / ((1.0 - 0.5) * om));
    }
    const double bound = 0.25 - 2.0 * 0.5 * eps * (1.0 + 0.5 * C);
    for (const auto& rs : states) CHECK(x_of_q(rs, level) >= bound - 1e-12);
    // The first term alone contributes 2Q = mu^2 on the level set.
    CHECK(bound > 0.0);
}

TEST_CASE("scaling the fiber only scales the quadratic prefactor") {
    const MassRatio mu(0.3);
    const RegularizedLevel level(mu, EnergyLevel(-2.0));
    RegularizedState s;
    s.xi = {-0.8, 0.6, 0.0, 0.0};
    s.eta = {0.0, 0.0, 0.5, 0.2};
    s = project_to_constraints(s);
    const double f = eval_f(s, level);
    RegularizedState s2 = s;
    for (auto& v : s2.eta) v *= 2.0;
    // |eta|^2/2 quadruples; freeze f at the base state to isolate it.
    const double prefactor_1 = 2.0 * eval_Q_reg(s, level) / (f * f);
    const double f2 = eval_f(s2, level);
    const double prefactor_2 = 2.0 * eval_Q_reg(s2, level) / (f2 * f2);
    CHECK(prefactor_2 == doctest::Approx(4.0 * prefactor_1).epsilon(1e-12));
}

TEST_CASE("Earth collision inside the chart is a domain error") {
    // South pole with eta = (0, 1/2, 0, 0) puts w = (1-xi0) eta_vec + M - E
    // exactly at the Earth singularity.
    const RegularizedLevel level{MassRatio(0.3), EnergyLevel(-2.0)};
    RegularizedState s;
    s.xi = {-1.0, 0.0, 0.0, 0.0};
    s.eta = {0.0, 0.5, 0.0, 0.0};
    CHECK_THROWS_AS(eval_f(s, level), std::domain_error);
    CHECK_THROWS_AS(grad_f(s, level), std::domain_error);
}

TEST_CASE("certificate also passes at an asymmetric mass ratio") {
    const MassRatio mu(0.25);
    const RegularizedCertificate cert =
        certify_regularized(EnergyLevel(-2.0), mu, 0.05, 4000, 9);
    CHECK(cert.pass);
    CHECK(cert.min_abs_f >= 0.125);
}

TEST_CASE("regularized states serialize as 8-tuples") {
    RegularizedState s;
    s.xi = {0.5, 0.25, 0.125, 2.0};
    s.eta = {-1.0, -2.0, -3.0, -4.0};
    const auto j = io::to_json(s);
    REQUIRE(j.is_array());
    REQUIRE(j.size() == 8);
    CHECK(j[0].get<double>() == 0.5);
    CHECK(j[7].get<double>() == -4.0);

    std::ostringstream os;
    io::write_regularized_csv(os, {s}, io::Header{0.5, -2.2, 1, {}});
    const std::string text = os.str();
    CHECK(text.find("xi0,xi1,xi2,xi3,eta0,eta1,eta2,eta3") != std::string::npos);
    CHECK(text.find("0.5,0.25,0.125,2,-1,-2,-3,-4") != std::string::npos);
}

TEST_CASE("joint regularized certificate passes below c1 and validates eps") {
    const MassRatio mu(0.5);
    const RegularizedCertificate cert =
        certify_regularized(EnergyLevel(-2.2), mu, 0.05, 20000, 5);
    CHECK(cert.pass);
    CHECK(cert.min_xq > 0.0);
    CHECK(cert.min_abs_f >= 0.25);
    CHECK(cert.max_abs_eta <= 2.0);
    CHECK(cert.max_level_residual < 1e-10);
    CHECK(cert.collar_min_xh > 0.0);
    CHECK(cert.collar_min_xq > 0.0);
    CHECK(cert.away.pass);

    // eps beyond the feasible chart size eps' = mu/2 is rejected up front.
    CHECK_THROWS_AS(certify_regularized(EnergyLevel(-2.2), mu, 0.3, 100, 5),
                    std::invalid_argument);
    // The gluing regime is not this function's job.
    CHECK_THROWS_AS(certify_regularized(EnergyLevel(-1.9), mu, 0.05, 100, 5),
                    std::invalid_argument);
}
