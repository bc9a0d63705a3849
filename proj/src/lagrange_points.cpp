#include "crtbp/lagrange_points.hpp"

#include "crtbp/core_dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace crtbp {

namespace {

// Axis restriction of grad U: g(x) = dU/dq1 (x,0,0).
double axis_gradient(double x, double mu) {
    const double sm = (x >= 0.0) ? 1.0 : -1.0;
    const double se = (x >= 1.0) ? 1.0 : -1.0;
    return mu * sm / (x * x) + (1.0 - mu) * se / ((x - 1.0) * (x - 1.0)) - (x - 1.0 + mu);
}

double axis_gradient_slope(double x, double mu) {
    const double sm = (x >= 0.0) ? 1.0 : -1.0;
    const double se = (x >= 1.0) ? 1.0 : -1.0;
    return -2.0 * mu * sm / (x * x * x) - 2.0 * (1.0 - mu) * se / std::pow(x - 1.0, 3) - 1.0;
}

// Bisection to a tight bracket, then Newton polished to |g| < 1e-12.
double refine_root(double lo, double hi, double mu) {
    double flo = axis_gradient(lo, mu);
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        const double fm = axis_gradient(mid, mu);
        if ((flo < 0.0) == (fm < 0.0)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        if (hi - lo < 1e-13 * std::max(1.0, std::abs(mid))) break;
    }
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 60; ++it) {
        const double g = axis_gradient(x, mu);
        if (std::abs(g) < 1e-12) break;
        const double dg = axis_gradient_slope(x, mu);
        const double xn = x - g / dg;
        // The bisection bracket is already tight; reject any wild Newton step.
        if (!(std::abs(xn - x) < 1e-6 * std::max(1.0, std::abs(x)))) break;
        x = xn;
    }
    return x;
}

void scan_interval(double a, double b, int steps, double mu, std::vector<double>& roots,
                   std::vector<std::pair<double, double>>& scanned) {
    scanned.emplace_back(a, b);
    double x0 = a;
    double f0 = axis_gradient(x0, mu);
    for (int i = 1; i <= steps; ++i) {
        const double x1 = a + (b - a) * static_cast<double>(i) / steps;
        const double f1 = axis_gradient(x1, mu);
        if ((f0 < 0.0) != (f1 < 0.0)) roots.push_back(refine_root(x0, x1, mu));
        x0 = x1;
        f0 = f1;
    }
}

} // namespace

std::vector<double> collinear_points(const MassRatio& mr) {
    const double mu = mr.value();
    std::vector<double> roots;
    std::vector<std::pair<double, double>> scanned;

    // Between the primaries g goes from +inf (Moon side) to -inf (Earth side).
    scan_interval(1e-6, 1.0 - 1e-6, 4000, mu, roots, scanned);
    // Beyond the Moon (x < 0) and beyond the Earth (x > 1): log-spaced spans.
    for (double span = 1e-3; span < 8.0; span *= 1.6) {
        const std::size_t before = roots.size();
        scan_interval(-span * 1.6, -span, 64, mu, roots, scanned);
        scan_interval(1.0 + span, 1.0 + span * 1.6, 64, mu, roots, scanned);
        (void)before;
    }

    std::sort(roots.begin(), roots.end());
    roots.erase(std::unique(roots.begin(), roots.end(),
                            [](double a, double b) { return std::abs(a - b) < 1e-9; }),
                roots.end());
    if (roots.size() != 3) {
        std::ostringstream msg;
        msg << "collinear root bracketing failed: found " << roots.size()
            << " roots; scanned intervals:";
        for (auto& [a, b] : scanned) msg << " [" << a << "," << b << "]";
        throw std::runtime_error(msg.str());
    }
    return roots;
}

std::vector<Vec3> triangular_points(const MassRatio& mr) {
    std::vector<Vec3> out;
    for (const double sign : {1.0, -1.0}) {
        Vec3 q{0.5, sign * 0.8660254037844386, 0.0};
        for (int it = 0; it < 100; ++it) {
            const Vec3 g = grad_U(q, mr);
            if (std::hypot(g[0], g[1]) < 1e-14) break;
            // 2-D Newton on the planar gradient with a finite-difference Jacobian.
            const double eps = 1e-7;
            Vec3 qx = q, qy = q;
            qx[0] += eps;
            qy[1] += eps;
            const Vec3 gx = grad_U(qx, mr);
            const Vec3 gy = grad_U(qy, mr);
            const double j11 = (gx[0] - g[0]) / eps, j12 = (gy[0] - g[0]) / eps;
            const double j21 = (gx[1] - g[1]) / eps, j22 = (gy[1] - g[1]) / eps;
            const double det = j11 * j22 - j12 * j21;
            if (std::abs(det) < 1e-14) break;
            q[0] -= (j22 * g[0] - j12 * g[1]) / det;
            q[1] -= (-j21 * g[0] + j11 * g[1]) / det;
        }
        const Vec3 g = grad_U(q, mr);
        if (std::hypot(g[0], g[1]) > 1e-10)
            throw std::runtime_error("triangular point Newton did not converge");
        out.push_back(q);
    }
    return out;
}

LagrangeSet lagrange_set(const MassRatio& mr) {
    const double mu = mr.value();
    std::vector<Vec3> positions;
    const std::vector<double> axis = collinear_points(mr);
    for (double x : axis) positions.push_back({x, 0.0, 0.0});
    for (const Vec3& q : triangular_points(mr)) positions.push_back(q);

    LagrangeSet set;
    for (const Vec3& q : positions) {
        LagrangePoint lp;
        lp.q = q;
        lp.phase_point = {q[0], q[1], 0.0, -q[1], q[0] - 1.0 + mu, 0.0};
        lp.critical_value = eval_U(q, mr);
        lp.grad_norm = norm(grad_U(q, mr));
        set.points.push_back(lp);
    }

    std::sort(set.points.begin(), set.points.end(), [](const LagrangePoint& a, const LagrangePoint& b) {
        if (a.critical_value != b.critical_value) return a.critical_value < b.critical_value;
        if (a.q[0] != b.q[0]) return a.q[0] < b.q[0];
        return a.q[1] < b.q[1];
    });
    for (std::size_t i = 0; i < set.points.size(); ++i) set.points[i].index = static_cast<int>(i) + 1;

    const Vec3& first = set.points.front().q;
    if (!(first[0] > 0.0 && first[0] < 1.0 && first[1] == 0.0))
        throw std::runtime_error(
            "ordering violation: smallest critical value not attained between the primaries");
    return set;
}

} // namespace crtbp
