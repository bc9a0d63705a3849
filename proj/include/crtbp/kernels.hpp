#pragma once

#include <cstddef>
#include <string>

namespace crtbp::kernels {

// Batch kernels for the certification inner loops. Each kernel exists as a
// scalar reference implementation and (on x86 with AVX2+FMA) a vectorized
// variant; the active backend is chosen once at startup and can be forced
// with the CRTBP_KERNELS environment variable ("scalar" or "avx2") or
// programmatically via set_backend. The two backends are equivalence-tested
// against each other.

enum class Backend { Scalar, Avx2 };

Backend active_backend();
void set_backend(Backend b);
bool avx2_available();
std::string backend_name(Backend b);

/// Effective potential U at n points (component arrays).
void eval_u(const double* qx, const double* qy, const double* qz, std::size_t n, double mu,
            double* out);

/// Radial derivative dU/drho at n spherical samples about the Moon.
/// w = cos(theta)*sin(phi), s2f = sin(phi)^2.
void du_drho(const double* rho, const double* w, const double* s2f, std::size_t n, double mu,
             double* out);

/// Second radial derivative d2U/drho2 at n spherical samples.
void d2u_drho2(const double* rho, const double* w, const double* s2f, std::size_t n, double mu,
               double* out);

/// Pairing dH(X_P) of the radial Liouville field X_P = (q - P) . d/dq with dH,
/// for a primary-centered P = (cx, 0, 0) (cx = 0: Moon, cx = 1: Earth).
void x_of_h(const double* qx, const double* qy, const double* qz, const double* px,
            const double* py, std::size_t n, double mu, double cx, double* out);

namespace detail {
void eval_u_scalar(const double*, const double*, const double*, std::size_t, double, double*);
void du_drho_scalar(const double*, const double*, const double*, std::size_t, double, double*);
void d2u_drho2_scalar(const double*, const double*, const double*, std::size_t, double, double*);
void x_of_h_scalar(const double*, const double*, const double*, const double*, const double*,
                   std::size_t, double, double, double*);
#if defined(__x86_64__) || defined(_M_X64)
void eval_u_avx2(const double*, const double*, const double*, std::size_t, double, double*);
void du_drho_avx2(const double*, const double*, const double*, std::size_t, double, double*);
void d2u_drho2_avx2(const double*, const double*, const double*, std::size_t, double, double*);
void x_of_h_avx2(const double*, const double*, const double*, const double*, const double*,
                 std::size_t, double, double, double*);
#endif
} // namespace detail

} // namespace crtbp::kernels
