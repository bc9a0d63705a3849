#include "crtbp/kernels.hpp"

#include <cmath>

namespace crtbp::kernels::detail {

void eval_u_scalar(const double* qx, const double* qy, const double* qz, std::size_t n, double mu,
                   double* out) {
    for (std::size_t i = 0; i < n; ++i) {
        const double x = qx[i], y = qy[i], z = qz[i];
        const double rm = std::sqrt(x * x + y * y + z * z);
        const double xe = x - 1.0;
        const double re = std::sqrt(xe * xe + y * y + z * z);
        const double a = x - 1.0 + mu;
        out[i] = -mu / rm - (1.0 - mu) / re - 0.5 * (a * a + y * y);
    }
}

void du_drho_scalar(const double* rho, const double* w, const double* s2f, std::size_t n,
                    double mu, double* out) {
    for (std::size_t i = 0; i < n; ++i) {
        const double r = rho[i], c = w[i];
        const double a = r * r - 2.0 * r * c + 1.0;
        const double a32 = a * std::sqrt(a);
        out[i] = mu / (r * r) + (1.0 - mu) * (r - c) / a32 + (1.0 - mu) * c - r * s2f[i];
    }
}

void d2u_drho2_scalar(const double* rho, const double* w, const double* s2f, std::size_t n,
                      double mu, double* out) {
    for (std::size_t i = 0; i < n; ++i) {
        const double r = rho[i], c = w[i];
        const double a = r * r - 2.0 * r * c + 1.0;
        const double a52 = a * a * std::sqrt(a);
        out[i] = -2.0 * mu / (r * r * r) -
                 (1.0 - mu) * (2.0 * r * r - 4.0 * r * c + 3.0 * c * c - 1.0) / a52 - s2f[i];
    }
}

void x_of_h_scalar(const double* qx, const double* qy, const double* qz, const double* px,
                   const double* py, std::size_t n, double mu, double cx, double* out) {
    for (std::size_t i = 0; i < n; ++i) {
        const double x = qx[i], y = qy[i], z = qz[i];
        const double rm2 = x * x + y * y + z * z;
        const double xe = x - 1.0;
        const double re2 = xe * xe + y * y + z * z;
        const double im3 = mu / (rm2 * std::sqrt(rm2));
        const double ie3 = (1.0 - mu) / (re2 * std::sqrt(re2));
        const double g1 = im3 * x + ie3 * xe - py[i];
        const double g2 = (im3 + ie3) * y + px[i];
        const double g3 = (im3 + ie3) * z;
        out[i] = (x - cx) * g1 + y * g2 + z * g3;
    }
}

} // namespace crtbp::kernels::detail
