#include "crtbp/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace crtbp::linalg {

std::vector<double> symmetric_eigenvalues(const Matrix& m) {
    const std::size_t n = m.rows();
    if (n != m.cols()) throw std::invalid_argument("symmetric_eigenvalues: square matrix required");
    Matrix a = m;

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
        if (off < 1e-30) break;

        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (std::abs(apq) < 1e-300) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p);
                    const double akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k);
                    const double aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
            }
        }
    }

    std::vector<double> ev(n);
    for (std::size_t i = 0; i < n; ++i) ev[i] = a(i, i);
    std::sort(ev.begin(), ev.end());
    return ev;
}

std::vector<double> qr_least_squares(const Matrix& a_in, const std::vector<double>& b_in,
                                     double rank_tol) {
    const std::size_t m = a_in.rows();
    const std::size_t n = a_in.cols();
    if (b_in.size() != m) throw std::invalid_argument("qr_least_squares: dimension mismatch");
    if (m < n) throw std::invalid_argument("qr_least_squares: rows < cols");

    Matrix a = a_in;
    std::vector<double> b = b_in;
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);

    std::vector<double> colnorm2(n, 0.0);
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < m; ++i) colnorm2[j] += a(i, j) * a(i, j);

    std::vector<double> rdiag(n, 0.0);
    std::size_t rank = n;

    for (std::size_t k = 0; k < n; ++k) {
        // Pivot: bring the column with the largest remaining norm to position k.
        std::size_t piv = k;
        for (std::size_t j = k + 1; j < n; ++j)
            if (colnorm2[j] > colnorm2[piv]) piv = j;
        if (piv != k) {
            for (std::size_t i = 0; i < m; ++i) std::swap(a(i, k), a(i, piv));
            std::swap(colnorm2[k], colnorm2[piv]);
            std::swap(perm[k], perm[piv]);
        }

        double alpha = 0.0;
        for (std::size_t i = k; i < m; ++i) alpha += a(i, k) * a(i, k);
        alpha = std::sqrt(alpha);
        if (a(k, k) > 0.0) alpha = -alpha;

        if (std::abs(alpha) < 1e-300) {
            rdiag[k] = 0.0;
            continue;
        }

        // Householder vector stored in the column below the diagonal.
        const double vkk = a(k, k) - alpha;
        a(k, k) = vkk;
        double vnorm2 = 0.0;
        for (std::size_t i = k; i < m; ++i) vnorm2 += a(i, k) * a(i, k);
        rdiag[k] = alpha;

        for (std::size_t j = k + 1; j < n; ++j) {
            double s = 0.0;
            for (std::size_t i = k; i < m; ++i) s += a(i, k) * a(i, j);
            const double f = 2.0 * s / vnorm2;
            for (std::size_t i = k; i < m; ++i) a(i, j) -= f * a(i, k);
            const double akj = a(k, j);
            colnorm2[j] = std::max(0.0, colnorm2[j] - akj * akj);
        }
        {
            double s = 0.0;
            for (std::size_t i = k; i < m; ++i) s += a(i, k) * b[i];
            const double f = 2.0 * s / vnorm2;
            for (std::size_t i = k; i < m; ++i) b[i] -= f * a(i, k);
        }
    }

    const double pivmax = std::abs(rdiag.empty() ? 0.0 : rdiag[0]);
    for (std::size_t k = 0; k < n; ++k) {
        if (std::abs(rdiag[k]) <= rank_tol * pivmax) {
            rank = k;
            break;
        }
    }

    // Back substitution on the leading rank x rank triangle; truncated
    // directions get a zero component.
    std::vector<double> y(n, 0.0);
    for (std::size_t kk = rank; kk-- > 0;) {
        double s = b[kk];
        for (std::size_t j = kk + 1; j < rank; ++j) s -= a(kk, j) * y[j];
        y[kk] = s / rdiag[kk];
    }

    std::vector<double> x(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) x[perm[k]] = y[k];
    return x;
}

} // namespace crtbp::linalg
