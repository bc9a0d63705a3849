// AVX2+FMA variants of the batch kernels. Compiled with -mavx2 -mfma for this
// translation unit only; callers reach these through the runtime dispatch in
// kernels_dispatch.cpp.

#include "crtbp/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

namespace crtbp::kernels::detail {

namespace {

inline __m256d inv_sqrt_cube(__m256d r2) {
    // 1 / (r2 * sqrt(r2)) = r2^(-3/2)
    const __m256d r = _mm256_sqrt_pd(r2);
    return _mm256_div_pd(_mm256_set1_pd(1.0), _mm256_mul_pd(r2, r));
}

} // namespace

void eval_u_avx2(const double* qx, const double* qy, const double* qz, std::size_t n, double mu,
                 double* out) {
    const __m256d vmu = _mm256_set1_pd(mu);
    const __m256d vom = _mm256_set1_pd(1.0 - mu);
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d half = _mm256_set1_pd(0.5);
    const __m256d shift = _mm256_set1_pd(mu - 1.0); // q1 - 1 + mu
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d x = _mm256_loadu_pd(qx + i);
        const __m256d y = _mm256_loadu_pd(qy + i);
        const __m256d z = _mm256_loadu_pd(qz + i);
        const __m256d y2z2 = _mm256_fmadd_pd(y, y, _mm256_mul_pd(z, z));
        const __m256d rm = _mm256_sqrt_pd(_mm256_fmadd_pd(x, x, y2z2));
        const __m256d xe = _mm256_sub_pd(x, one);
        const __m256d re = _mm256_sqrt_pd(_mm256_fmadd_pd(xe, xe, y2z2));
        const __m256d a = _mm256_add_pd(x, shift);
        const __m256d sq = _mm256_fmadd_pd(a, a, _mm256_mul_pd(y, y));
        __m256d u = _mm256_sub_pd(_mm256_setzero_pd(), _mm256_div_pd(vmu, rm));
        u = _mm256_sub_pd(u, _mm256_div_pd(vom, re));
        u = _mm256_fnmadd_pd(half, sq, u);
        _mm256_storeu_pd(out + i, u);
    }
    if (i < n) eval_u_scalar(qx + i, qy + i, qz + i, n - i, mu, out + i);
}

void du_drho_avx2(const double* rho, const double* w, const double* s2f, std::size_t n, double mu,
                  double* out) {
    const __m256d vmu = _mm256_set1_pd(mu);
    const __m256d vom = _mm256_set1_pd(1.0 - mu);
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d two = _mm256_set1_pd(2.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d r = _mm256_loadu_pd(rho + i);
        const __m256d c = _mm256_loadu_pd(w + i);
        const __m256d s2 = _mm256_loadu_pd(s2f + i);
        const __m256d a = _mm256_fmadd_pd(r, r, _mm256_fnmadd_pd(_mm256_mul_pd(two, r), c, one));
        const __m256d ia32 = inv_sqrt_cube(a);
        __m256d v = _mm256_div_pd(vmu, _mm256_mul_pd(r, r));
        v = _mm256_fmadd_pd(_mm256_mul_pd(vom, _mm256_sub_pd(r, c)), ia32, v);
        v = _mm256_fmadd_pd(vom, c, v);
        v = _mm256_fnmadd_pd(r, s2, v);
        _mm256_storeu_pd(out + i, v);
    }
    if (i < n) du_drho_scalar(rho + i, w + i, s2f + i, n - i, mu, out + i);
}

void d2u_drho2_avx2(const double* rho, const double* w, const double* s2f, std::size_t n,
                    double mu, double* out) {
    const __m256d vmu2 = _mm256_set1_pd(2.0 * mu);
    const __m256d vom = _mm256_set1_pd(1.0 - mu);
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d two = _mm256_set1_pd(2.0);
    const __m256d three = _mm256_set1_pd(3.0);
    const __m256d four = _mm256_set1_pd(4.0);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d r = _mm256_loadu_pd(rho + i);
        const __m256d c = _mm256_loadu_pd(w + i);
        const __m256d s2 = _mm256_loadu_pd(s2f + i);
        const __m256d a = _mm256_fmadd_pd(r, r, _mm256_fnmadd_pd(_mm256_mul_pd(two, r), c, one));
        const __m256d sa = _mm256_sqrt_pd(a);
        const __m256d ia52 = _mm256_div_pd(one, _mm256_mul_pd(_mm256_mul_pd(a, a), sa));
        // 2 r^2 - 4 r c + 3 c^2 - 1
        __m256d num = _mm256_fmadd_pd(two, _mm256_mul_pd(r, r), _mm256_set1_pd(-1.0));
        num = _mm256_fnmadd_pd(four, _mm256_mul_pd(r, c), num);
        num = _mm256_fmadd_pd(three, _mm256_mul_pd(c, c), num);
        const __m256d r3 = _mm256_mul_pd(_mm256_mul_pd(r, r), r);
        __m256d v = _mm256_sub_pd(_mm256_setzero_pd(), _mm256_div_pd(vmu2, r3));
        v = _mm256_fnmadd_pd(_mm256_mul_pd(vom, num), ia52, v);
        v = _mm256_sub_pd(v, s2);
        _mm256_storeu_pd(out + i, v);
    }
    if (i < n) d2u_drho2_scalar(rho + i, w + i, s2f + i, n - i, mu, out + i);
}

void x_of_h_avx2(const double* qx, const double* qy, const double* qz, const double* px,
                 const double* py, std::size_t n, double mu, double cx, double* out) {
    const __m256d vmu = _mm256_set1_pd(mu);
    const __m256d vom = _mm256_set1_pd(1.0 - mu);
    const __m256d one = _mm256_set1_pd(1.0);
    const __m256d vcx = _mm256_set1_pd(cx);
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) {
        const __m256d x = _mm256_loadu_pd(qx + i);
        const __m256d y = _mm256_loadu_pd(qy + i);
        const __m256d z = _mm256_loadu_pd(qz + i);
        const __m256d p1 = _mm256_loadu_pd(px + i);
        const __m256d p2 = _mm256_loadu_pd(py + i);
        const __m256d y2z2 = _mm256_fmadd_pd(y, y, _mm256_mul_pd(z, z));
        const __m256d rm2 = _mm256_fmadd_pd(x, x, y2z2);
        const __m256d xe = _mm256_sub_pd(x, one);
        const __m256d re2 = _mm256_fmadd_pd(xe, xe, y2z2);
        const __m256d im3 = _mm256_mul_pd(vmu, inv_sqrt_cube(rm2));
        const __m256d ie3 = _mm256_mul_pd(vom, inv_sqrt_cube(re2));
        const __m256d g1 = _mm256_sub_pd(_mm256_fmadd_pd(im3, x, _mm256_mul_pd(ie3, xe)), p2);
        const __m256d sum3 = _mm256_add_pd(im3, ie3);
        const __m256d g2 = _mm256_fmadd_pd(sum3, y, p1);
        const __m256d g3 = _mm256_mul_pd(sum3, z);
        __m256d v = _mm256_mul_pd(_mm256_sub_pd(x, vcx), g1);
        v = _mm256_fmadd_pd(y, g2, v);
        v = _mm256_fmadd_pd(z, g3, v);
        _mm256_storeu_pd(out + i, v);
    }
    if (i < n) x_of_h_scalar(qx + i, qy + i, qz + i, px + i, py + i, n - i, mu, cx, out + i);
}

} // namespace crtbp::kernels::detail

#endif // x86_64
