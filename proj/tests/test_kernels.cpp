#include <doctest.h>

#include "crtbp/core_dynamics.hpp"
#include "crtbp/kernels.hpp"
#include "crtbp/rng.hpp"
#include "crtbp/transversality.hpp"

#include <cmath>
#include <vector>

using namespace crtbp;

namespace {

struct BackendGuard {
    kernels::Backend saved;
    BackendGuard() : saved(kernels::active_backend()) {}
    ~BackendGuard() { kernels::set_backend(saved); }
};

} // namespace

TEST_CASE("scalar batch kernels reproduce the single-point definitions") {
    BackendGuard guard;
    kernels::set_backend(kernels::Backend::Scalar);
    const double mu = 0.37;
    Rng rng(1234);
    const std::size_t n = 257;
    std::vector<double> qx(n), qy(n), qz(n), px(n), py(n), out(n);
    for (std::size_t i = 0; i < n; ++i) {
        qx[i] = rng.uniform(-1.5, 1.5);
        qy[i] = rng.uniform(-1.5, 1.5);
        qz[i] = rng.uniform(-1.5, 1.5);
        if (std::hypot(qx[i], qy[i], qz[i]) < 0.05) qy[i] += 0.3;
        if (std::hypot(qx[i] - 1.0, qy[i], qz[i]) < 0.05) qy[i] += 0.3;
        px[i] = rng.uniform(-2.0, 2.0);
        py[i] = rng.uniform(-2.0, 2.0);
    }

    kernels::eval_u(qx.data(), qy.data(), qz.data(), n, mu, out.data());
    for (std::size_t i = 0; i < n; ++i) {
        const double ref = eval_U({qx[i], qy[i], qz[i]}, MassRatio(mu));
        CHECK(out[i] == doctest::Approx(ref).epsilon(1e-14));
    }

    kernels::x_of_h(qx.data(), qy.data(), qz.data(), px.data(), py.data(), n, mu, 0.0,
                    out.data());
    for (std::size_t i = 0; i < n; ++i) {
        RotatingState s{{qx[i], qy[i], qz[i]}, {px[i], py[i], 0.3}};
        const double ref = x_of_h(s, MassRatio(mu));
        CHECK(out[i] == doctest::Approx(ref).epsilon(1e-12));
    }
}

TEST_CASE("radial derivative kernels match finite differences of U") {
    BackendGuard guard;
    kernels::set_backend(kernels::Backend::Scalar);
    const MassRatio mu(0.42);
    Rng rng(77);
    for (int trial = 0; trial < 400; ++trial) {
        const double rho = rng.uniform(0.02, 0.6);
        const double theta = rng.uniform(0.0, 2.0 * kPi);
        const double phi = rng.uniform(0.0, kPi);
        auto u_of_rho = [&](double r) { return eval_U(from_spherical({r, theta, phi}), mu); };
        const double h = 1e-5 * std::max(0.05, rho);
        const double fd1 =
            (-u_of_rho(rho + 2 * h) + 8 * u_of_rho(rho + h) - 8 * u_of_rho(rho - h) +
             u_of_rho(rho - 2 * h)) /
            (12 * h);
        const double fd2 = (u_of_rho(rho + h) - 2.0 * u_of_rho(rho) + u_of_rho(rho - h)) / (h * h);

        const double d1 = du_drho(rho, theta, phi, mu);
        const double d2 = d2u_drho2(rho, theta, phi, mu);
        CHECK(std::abs(d1 - fd1) / std::max(1.0, std::abs(d1)) < 1e-6);
        CHECK(std::abs(d2 - fd2) / std::max(1.0, std::abs(d2)) < 1e-5);
    }
}

TEST_CASE("frozen radial derivative value at the symmetric configuration") {
    // mu=1/2, rho=1/4, theta=0, phi=pi/2: exact hand evaluation gives
    // 8 - 8/9 - 1/4 + 1/2 = 265/36.
    const double v = du_drho(0.25, 0.0, kPi / 2, MassRatio(0.5));
    CHECK(v == doctest::Approx(265.0 / 36.0).epsilon(1e-14));
}

TEST_CASE("avx2 kernels agree with the scalar reference") {
    if (!kernels::avx2_available()) return; // nothing to compare on this host

    const double mu = 0.21;
    Rng rng(9001);
    const std::size_t n = 1031; // odd length exercises the scalar tail
    std::vector<double> qx(n), qy(n), qz(n), px(n), py(n);
    std::vector<double> rho(n), w(n), s2f(n);
    for (std::size_t i = 0; i < n; ++i) {
        qx[i] = rng.uniform(-2.0, 2.0);
        qy[i] = rng.uniform(-2.0, 2.0);
        qz[i] = rng.uniform(-2.0, 2.0);
        if (std::hypot(qx[i], qy[i], qz[i]) < 0.03) qx[i] += 0.5;
        if (std::hypot(qx[i] - 1.0, qy[i], qz[i]) < 0.03) qx[i] += 0.5;
        px[i] = rng.uniform(-3.0, 3.0);
        py[i] = rng.uniform(-3.0, 3.0);
        rho[i] = rng.uniform(1e-3, 0.8);
        const double theta = rng.uniform(0.0, 2.0 * kPi);
        const double phi = rng.uniform(0.0, kPi);
        w[i] = std::cos(theta) * std::sin(phi);
        s2f[i] = std::sin(phi) * std::sin(phi);
    }

    std::vector<double> a(n), b(n);
    BackendGuard guard;

    auto compare = [&](auto&& run) {
        kernels::set_backend(kernels::Backend::Scalar);
        run(a);
        kernels::set_backend(kernels::Backend::Avx2);
        run(b);
        for (std::size_t i = 0; i < n; ++i) {
            const double scale = std::max(1.0, std::abs(a[i]));
            CHECK(std::abs(a[i] - b[i]) / scale < 1e-12);
        }
    };

    compare([&](std::vector<double>& out) {
        kernels::eval_u(qx.data(), qy.data(), qz.data(), n, mu, out.data());
    });
    compare([&](std::vector<double>& out) {
        kernels::du_drho(rho.data(), w.data(), s2f.data(), n, mu, out.data());
    });
    compare([&](std::vector<double>& out) {
        kernels::d2u_drho2(rho.data(), w.data(), s2f.data(), n, mu, out.data());
    });
    compare([&](std::vector<double>& out) {
        kernels::x_of_h(qx.data(), qy.data(), qz.data(), px.data(), py.data(), n, mu, 1.0,
                        out.data());
    });
}
