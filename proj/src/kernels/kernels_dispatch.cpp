#include "crtbp/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace crtbp::kernels {

bool avx2_available() {
#if defined(__x86_64__) || defined(_M_X64)
    return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
    return false;
#endif
}

namespace {

Backend pick_default() {
    if (const char* env = std::getenv("CRTBP_KERNELS")) {
        if (std::strcmp(env, "scalar") == 0) return Backend::Scalar;
        if (std::strcmp(env, "avx2") == 0 && avx2_available()) return Backend::Avx2;
    }
    return avx2_available() ? Backend::Avx2 : Backend::Scalar;
}

Backend& backend_slot() {
    static Backend b = pick_default();
    return b;
}

} // namespace

Backend active_backend() { return backend_slot(); }

void set_backend(Backend b) {
    if (b == Backend::Avx2 && !avx2_available()) b = Backend::Scalar;
    backend_slot() = b;
}

std::string backend_name(Backend b) { return b == Backend::Avx2 ? "avx2" : "scalar"; }

void eval_u(const double* qx, const double* qy, const double* qz, std::size_t n, double mu,
            double* out) {
#if defined(__x86_64__) || defined(_M_X64)
    if (active_backend() == Backend::Avx2) {
        detail::eval_u_avx2(qx, qy, qz, n, mu, out);
        return;
    }
#endif
    detail::eval_u_scalar(qx, qy, qz, n, mu, out);
}

void du_drho(const double* rho, const double* w, const double* s2f, std::size_t n, double mu,
             double* out) {
#if defined(__x86_64__) || defined(_M_X64)
    if (active_backend() == Backend::Avx2) {
        detail::du_drho_avx2(rho, w, s2f, n, mu, out);
        return;
    }
#endif
    detail::du_drho_scalar(rho, w, s2f, n, mu, out);
}

void d2u_drho2(const double* rho, const double* w, const double* s2f, std::size_t n, double mu,
               double* out) {
#if defined(__x86_64__) || defined(_M_X64)
    if (active_backend() == Backend::Avx2) {
        detail::d2u_drho2_avx2(rho, w, s2f, n, mu, out);
        return;
    }
#endif
    detail::d2u_drho2_scalar(rho, w, s2f, n, mu, out);
}

void x_of_h(const double* qx, const double* qy, const double* qz, const double* px,
            const double* py, std::size_t n, double mu, double cx, double* out) {
#if defined(__x86_64__) || defined(_M_X64)
    if (active_backend() == Backend::Avx2) {
        detail::x_of_h_avx2(qx, qy, qz, px, py, n, mu, cx, out);
        return;
    }
#endif
    detail::x_of_h_scalar(qx, qy, qz, px, py, n, mu, cx, out);
}

} // namespace crtbp::kernels
