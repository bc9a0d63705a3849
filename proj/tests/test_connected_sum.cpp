#include <doctest.h>

#include "crtbp/connected_sum.hpp"
#include "crtbp/core_dynamics.hpp"
#include "crtbp/rng.hpp"
#include "crtbp/transversality.hpp"

#include <cmath>

using namespace crtbp;

TEST_CASE("quadratic form at L1: rho parameter and block structure") {
    const MassRatio mu(0.5);
    const QuadraticFormQ q = quadratic_form_at_L1(mu);
    // |qL - M| = |qL - E| = 1/2 at the symmetric ratio: rho = 4 + 4 = 8.
    CHECK(q.rho_param == doctest::Approx(8.0).epsilon(1e-12));

    const double r = q.rho_param;
    // Literal block form, basis (q1,q2,p1,p2,q3,p3), including the 1/2 factor.
    CHECK(q.matrix(0, 0) == doctest::Approx(-r));
    CHECK(q.matrix(1, 1) == doctest::Approx(0.5 * r));
    CHECK(q.matrix(2, 2) == doctest::Approx(0.5));
    CHECK(q.matrix(3, 3) == doctest::Approx(0.5));
    CHECK(q.matrix(4, 4) == doctest::Approx(0.5 * r));
    CHECK(q.matrix(5, 5) == doctest::Approx(0.5));
    CHECK(q.matrix(0, 3) == doctest::Approx(-0.5));
    CHECK(q.matrix(1, 2) == doctest::Approx(0.5));
    for (int i = 0; i < 4; ++i)
        for (int j = 4; j < 6; ++j) CHECK(q.matrix(i, j) == 0.0);
}

TEST_CASE("matrix equals half the Hessian of H at L1") {
    for (const double m : {0.2, 0.5, 0.8}) {
        const MassRatio mu(m);
        const QuadraticFormQ q = quadratic_form_at_L1(mu);
        const Mat6 h = hessian_H(RotatingState::from_flat(q.l1_phase), mu);
        const int perm[6] = {0, 1, 3, 4, 2, 5}; // block basis -> standard indices
        for (int i = 0; i < 6; ++i)
            for (int j = 0; j < 6; ++j)
                CHECK(std::abs(q.matrix(i, j) - 0.5 * h(perm[i], perm[j])) < 1e-6);
    }
}

TEST_CASE("lower block contributes gamma rho q3^2 + (1-gamma) p3^2") {
    const MassRatio mu(0.5);
    const QuadraticFormQ q = quadratic_form_at_L1(mu);
    const YFieldParams p{-0.7, 0.4, 0.3};
    Rng rng(2);
    for (int i = 0; i < 200; ++i) {
        Vec6 d{};
        d[2] = rng.uniform(-1, 1); // q3
        d[5] = rng.uniform(-1, 1); // p3
        const double expected =
            p.gamma * q.rho_param * d[2] * d[2] + (1.0 - p.gamma) * d[5] * d[5];
        CHECK(y_of_q_value(q, p, d) == doctest::Approx(expected).epsilon(1e-12));
    }
    // gamma = 1/2 makes both lower-block coefficients manifestly positive.
    const YFieldParams half{-0.5, 0.5, 0.5};
    Vec6 d{};
    d[2] = 0.3;
    d[5] = -0.4;
    CHECK(y_of_q_value(q, half, d) ==
          doctest::Approx(0.5 * q.rho_param * 0.09 + 0.5 * 0.16).epsilon(1e-12));
}

TEST_CASE("parameter search returns admissible ranges with a positive spectrum") {
    for (const double m : {0.1, 0.5, 0.9}) {
        const MassRatio mu(m);
        const QuadraticFormQ q = quadratic_form_at_L1(mu);
        CHECK(q.rho_param > 1.0); // sign hypothesis used by the gluing term
        const YParamSearchResult res = find_Y_params(q);
        CHECK(res.params.a < 0.0);
        CHECK(res.params.b > 0.0);
        CHECK(res.params.gamma > 0.0);
        CHECK(res.params.gamma < 1.0);
        CHECK(res.positive_definite);
        CHECK(res.min_eigenvalue > 0.0);
        // Spectrum consistency: quadratic form positive on random directions.
        Rng rng(3);
        for (int i = 0; i < 500; ++i) {
            Vec6 d{};
            for (auto& v : d) v = rng.uniform(-1, 1);
            double n2 = 0.0;
            for (double v : d) n2 += v * v;
            if (n2 < 1e-8) continue;
            CHECK(y_of_q_value(q, res.params, d) >= res.min_eigenvalue * n2 - 1e-9);
        }
    }
}

TEST_CASE("Y pairing is positive on level sets near L1 and dominated by Y(Q)") {
    const MassRatio mu(0.5);
    const QuadraticFormQ q = quadratic_form_at_L1(mu);
    const YParamSearchResult yp = find_Y_params(q);
    const double c1 = -2.0;
    Rng rng(4);
    int found = 0;
    for (int i = 0; i < 40000 && found < 10000; ++i) {
        const double c = c1 + (i % 2 == 0 ? 1e-3 : -1e-3);
        const Vec3 pos = q.l1_position + rng.ball_point(0.2);
        const double u = eval_U(pos, mu);
        if (u > c) continue;
        const Vec3 v = std::sqrt(2.0 * (c - u)) * rng.unit_vec3();
        RotatingState st;
        st.q = pos;
        st.p = {v[0] - pos[1], v[1] + pos[0] - 0.5, v[2]};
        const Vec6 d = displacement_from_L1(st, q);
        double n2 = 0.0;
        for (double x : d) n2 += x * x;
        if (std::sqrt(n2) > 0.2) continue;
        ++found;
        const double yh = y_of_h(st, yp.params, q, mu);
        const double yq = y_of_q_value(q, yp.params, d);
        CHECK(yh > 0.0);
        // Remainder bound from the quadratic dominance in a small ball.
        CHECK(yh >= yq - 0.5 * std::abs(yq));
    }
    CHECK(found > 1000);
}

TEST_CASE("primitive G: dG = alpha_1 - alpha_0 and the vanishing at L1") {
    const MassRatio mu(0.5);
    const QuadraticFormQ q = quadratic_form_at_L1(mu);
    const YFieldParams p{-0.6, 0.7, 0.4};
    const double d_moon = q.l1_position[0];
    Rng rng(5);
    const double h = 1e-6;
    for (int trial = 0; trial < 300; ++trial) {
        Vec6 disp{};
        for (auto& v : disp) v = rng.uniform(-0.3, 0.3);
        const Vec6 base = q.l1_phase;
        RotatingState st;
        st.q = {base[0] + disp[0], base[1] + disp[1], base[2] + disp[2]};
        st.p = {base[3] + disp[3], base[4] + disp[4], base[5] + disp[5]};

        // (alpha_1 - alpha_0) components in L1-centered coordinates:
        //   du: ((1-a)v1, (1-b)v2, (1-gamma)v3)
        //   dv: ((1-a)u1 + d, (1-b)u2, (1-gamma)u3)
        const std::array<double, 6> expected{
            (1.0 - p.a) * disp[3],          (1.0 - p.b) * disp[4],
            (1.0 - p.gamma) * disp[5],      (1.0 - p.a) * disp[0] + d_moon,
            (1.0 - p.b) * disp[1],          (1.0 - p.gamma) * disp[2]};

        for (int k = 0; k < 6; ++k) {
            auto geval = [&](double x) {
                RotatingState t = st;
                Vec6 flat = t.flat();
                flat[static_cast<std::size_t>(k)] = x;
                return primitive_G(RotatingState::from_flat(flat), p, q, Component::Moon);
            };
            const double base_x = st.flat()[static_cast<std::size_t>(k)];
            const double fd = (geval(base_x + h) - geval(base_x - h)) / (2 * h);
            CHECK(std::abs(fd - expected[static_cast<std::size_t>(k)]) < 1e-8);
        }
    }
    // G vanishes at the Lagrange point itself (all displacements zero).
    CHECK(primitive_G(RotatingState::from_flat(q.l1_phase), p, q, Component::Moon) == 0.0);
}

TEST_CASE("Z1 = Z0 + Z_G as vector fields") {
    const MassRatio mu(0.5);
    const QuadraticFormQ q = quadratic_form_at_L1(mu);
    const YFieldParams p{-0.4, 0.9, 0.6};
    const double dm = q.l1_position[0];
    Rng rng(6);
    for (int trial = 0; trial < 500; ++trial) {
        Vec6 u{};
        for (auto& v : u) v = rng.uniform(-0.5, 0.5);
        // Z0 = ((u1+d, u2, u3), 0); Z_G from the Hamiltonian field of G.
        const std::array<double, 6> z0{u[0] + dm, u[1], u[2], 0.0, 0.0, 0.0};
        const std::array<double, 6> zg{-((1.0 - p.a) * u[0] + dm),
                                       -(1.0 - p.b) * u[1],
                                       -(1.0 - p.gamma) * u[2],
                                       (1.0 - p.a) * u[3],
                                       (1.0 - p.b) * u[4],
                                       (1.0 - p.gamma) * u[5]};
        const std::array<double, 6> y{p.a * u[0],         p.b * u[1],
                                      p.gamma * u[2],     (1.0 - p.a) * u[3],
                                      (1.0 - p.b) * u[4], (1.0 - p.gamma) * u[5]};
        for (int k = 0; k < 6; ++k)
            CHECK(std::abs(z0[static_cast<std::size_t>(k)] + zg[static_cast<std::size_t>(k)] -
                           y[static_cast<std::size_t>(k)]) < 1e-10);
    }
}

TEST_CASE("Liouville scaling of the flow of Y") {
    // The flow of Y for time t scales the symplectic pairing of any tangent
    // pair by e^t; checked with a finite-difference (RK4) flow.
    const YFieldParams p{-0.8, 0.3, 0.45};
    const double t_final = 1e-3;
    Rng rng(7);
    auto y_field = [&](const std::array<double, 6>& z) {
        return std::array<double, 6>{p.a * z[0],         p.b * z[1],
                                     p.gamma * z[2],     (1.0 - p.a) * z[3],
                                     (1.0 - p.b) * z[4], (1.0 - p.gamma) * z[5]};
    };
    auto flow = [&](std::array<double, 6> z) {
        const int n = 64;
        const double h = t_final / n;
        for (int i = 0; i < n; ++i) {
            const auto k1 = y_field(z);
            std::array<double, 6> z2;
            for (int k = 0; k < 6; ++k)
                z2[static_cast<std::size_t>(k)] =
                    z[static_cast<std::size_t>(k)] + 0.5 * h * k1[static_cast<std::size_t>(k)];
            const auto k2 = y_field(z2);
            for (int k = 0; k < 6; ++k)
                z2[static_cast<std::size_t>(k)] =
                    z[static_cast<std::size_t>(k)] + 0.5 * h * k2[static_cast<std::size_t>(k)];
            const auto k3 = y_field(z2);
            for (int k = 0; k < 6; ++k)
                z2[static_cast<std::size_t>(k)] =
                    z[static_cast<std::size_t>(k)] + h * k3[static_cast<std::size_t>(k)];
            const auto k4 = y_field(z2);
            for (int k = 0; k < 6; ++k)
                z[static_cast<std::size_t>(k)] +=
                    h / 6.0 *
                    (k1[static_cast<std::size_t>(k)] + 2 * k2[static_cast<std::size_t>(k)] +
                     2 * k3[static_cast<std::size_t>(k)] + k4[static_cast<std::size_t>(k)]);
        }
        return z;
    };
    auto omega = [](const std::array<double, 6>& a, const std::array<double, 6>& b) {
        // omega = dp ^ dq on (q1,q2,q3,p1,p2,p3) displacements
        double v = 0.0;
        for (int k = 0; k < 3; ++k)
            v += a[static_cast<std::size_t>(k + 3)] * b[static_cast<std::size_t>(k)] -
                 b[static_cast<std::size_t>(k + 3)] * a[static_cast<std::size_t>(k)];
        return v;
    };
    for (int trial = 0; trial < 100; ++trial) {
        std::array<double, 6> a{}, b{};
        for (auto& v : a) v = rng.uniform(-1, 1);
        for (auto& v : b) v = rng.uniform(-1, 1);
        // Linear field: pushforward of tangent vectors = flow of the vectors.
        const double before = omega(a, b);
        const double after = omega(flow(a), flow(b));
        if (std::abs(before) < 1e-3) continue;
        CHECK(std::abs(after / before - std::exp(t_final)) < 1e-4);
    }
}

TEST_CASE("glued pairing: decomposition identity and radial limit far from L1") {
    const MassRatio mu(0.5);
    const QuadraticFormQ q = quadratic_form_at_L1(mu);
    const YParamSearchResult yp = find_Y_params(q);
    const CutoffSpec cutoff{};
    Rng rng(8);
    for (int trial = 0; trial < 2000; ++trial) {
        RotatingState st;
        st.q = rng.ball_point(0.45);
        if (norm(st.q) < 0.01) st.q[0] += 0.05;
        st.p = {rng.uniform(-2, 2), rng.uniform(-2, 2), rng.uniform(-2, 2)};
        const ZBreakdown zb = z_of_h(st, yp.params, cutoff, q, mu);
        CHECK(zb.total ==
              doctest::Approx(zb.term_radial + zb.term_y + zb.term_g).epsilon(1e-12));
        if (zb.f == 0.0 && zb.side == Component::Moon) {
            // Outside the cut-off on the Moon side, Z is the radial field.
            CHECK(zb.total == doctest::Approx(x_of_h(st, mu)).epsilon(1e-12));
            CHECK(zb.term_y == 0.0);
            CHECK(zb.term_g == 0.0);
        }
    }
}

TEST_CASE("bracket term of dH(Z_f) vanishes at the Lagrange point") {
    for (const double m : {0.2, 0.5, 0.8}) {
        const MassRatio mu(m);
        const QuadraticFormQ q = quadratic_form_at_L1(mu);
        const double rm = norm(q.l1_position);
        const double re = norm(q.l1_position - earth_position());
        const double bracket =
            m / (rm * rm * rm) + (1.0 - m) / (re * re * re) - q.rho_param;
        CHECK(std::abs(bracket) < 1e-10);
    }
}

TEST_CASE("separating hyperplane slices: point at delta = 0, 4-sphere otherwise") {
    const MassRatio mu(0.5);
    const SeparatingSetReport zero = separating_set_check(0.0, mu, 2000, 3);
    CHECK(zero.rho_greater_than_one);
    CHECK(zero.pass);
    CHECK(zero.restricted_min_eigenvalue > 0.0);

    double prev_r2 = 0.0;
    for (const double delta : {0.05, 0.1, 0.2}) {
        const SeparatingSetReport rep = separating_set_check(delta, mu, 2000, 3);
        CHECK(rep.pass);
        CHECK(rep.max_quadric_residual < 1e-10);
        CHECK(rep.max_equation_residual < 1e-10);
        CHECK(rep.fitted_radius_sq ==
              doctest::Approx(rep.expected_radius_sq).epsilon(1e-10));
        CHECK(rep.fitted_radius_sq > prev_r2); // (2 rho + 1) delta^2 scaling
        prev_r2 = rep.fitted_radius_sq;
    }
}

TEST_CASE("glued certificate passes above c1 and the energy window is found") {
    const MassRatio mu(0.5);
    const QuadraticFormQ q = quadratic_form_at_L1(mu);
    const YParamSearchResult yp = find_Y_params(q);
    GluedCertifySpec spec;
    spec.n_samples = 10000;
    spec.seed = 13;
    const GluedCertificate cert =
        certify_glued(EnergyLevel(-1.995), mu, yp.params, CutoffSpec{}, spec);
    CHECK(cert.pass);
    CHECK(cert.min_z >= 0.0);

    const EnergyWindowResult win = find_energy_window(mu, yp.params, CutoffSpec{}, 4000, 13);
    CHECK(win.eps_E > 0.0);
    CHECK(win.certified_c > -2.0);
    CHECK(win.certified_c < -2.0 + win.eps_E + 1e-12);
    CHECK(win.certificate.pass);
}
