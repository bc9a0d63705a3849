#include "crtbp/hill_regions.hpp"

#include "crtbp/core_dynamics.hpp"
#include "crtbp/kernels.hpp"
#include "crtbp/lagrange_points.hpp"
#include <algorithm>
#include <cmath>
#include <ostream>
#include <queue>
#include <stdexcept>

namespace crtbp {

const char* to_string(HillComponentLabel label) {
    switch (label) {
        case HillComponentLabel::Forbidden: return "forbidden";
        case HillComponentLabel::MoonBounded: return "moon";
        case HillComponentLabel::EarthBounded: return "earth";
        case HillComponentLabel::Unbounded: return "unbounded";
        case HillComponentLabel::MoonEarthMerged: return "merged";
    }
    return "?";
}

std::size_t HillGrid::idx(int ix, int iy, int iz) const {
    return (static_cast<std::size_t>(iz) * spec_.ny + iy) * spec_.nx + ix;
}

Vec3 HillGrid::cell_center(int ix, int iy, int iz) const {
    const double hx = (spec_.x1 - spec_.x0) / spec_.nx;
    const double hy = (spec_.y1 - spec_.y0) / spec_.ny;
    const double hz = (spec_.z1 - spec_.z0) / spec_.nz;
    return {spec_.x0 + (ix + 0.5) * hx, spec_.y0 + (iy + 0.5) * hy, spec_.z0 + (iz + 0.5) * hz};
}

HillGrid::HillGrid(const EnergyLevel& c, const MassRatio& mu, const HillGridSpec& spec)
    : spec_(spec), c_(c.value()), mu_(mu.value()) {
    const std::size_t n =
        static_cast<std::size_t>(spec_.nx) * spec_.ny * static_cast<std::size_t>(spec_.nz);
    label_.assign(n, 0);

    // Allowed mask from a batch potential evaluation, one xy-slab at a time.
    std::vector<std::uint8_t> allowed(n, 0);
    {
        const std::size_t slab = static_cast<std::size_t>(spec_.nx) * spec_.ny;
        std::vector<double> qx(slab), qy(slab), qz(slab), u(slab);
        for (int iz = 0; iz < spec_.nz; ++iz) {
            std::size_t k = 0;
            for (int iy = 0; iy < spec_.ny; ++iy)
                for (int ix = 0; ix < spec_.nx; ++ix, ++k) {
                    const Vec3 q = cell_center(ix, iy, iz);
                    qx[k] = q[0];
                    qy[k] = q[1];
                    qz[k] = q[2];
                }
            kernels::eval_u(qx.data(), qy.data(), qz.data(), slab, mu_, u.data());
            for (std::size_t k2 = 0; k2 < slab; ++k2)
                allowed[static_cast<std::size_t>(iz) * slab + k2] = (u[k2] <= c_) ? 1 : 0;
        }
    }

    // Flood fill over allowed cells; component ids start at 1.
    std::vector<std::int32_t> comp(n, 0);
    std::int32_t next_id = 0;
    std::vector<std::uint8_t> touches_rim;

    std::queue<std::array<int, 3>> frontier;
    for (int iz = 0; iz < spec_.nz; ++iz) {
        for (int iy = 0; iy < spec_.ny; ++iy) {
            for (int ix = 0; ix < spec_.nx; ++ix) {
                const std::size_t i0 = idx(ix, iy, iz);
                if (!allowed[i0] || comp[i0] != 0) continue;
                ++next_id;
                touches_rim.push_back(0);
                comp[i0] = next_id;
                frontier.push({ix, iy, iz});
                while (!frontier.empty()) {
                    const auto [cx, cy, cz] = frontier.front();
                    frontier.pop();
                    if (cx == 0 || cx == spec_.nx - 1 || cy == 0 || cy == spec_.ny - 1)
                        touches_rim[next_id - 1] = 1;
                    static constexpr int d[6][3] = {{1, 0, 0},  {-1, 0, 0}, {0, 1, 0},
                                                    {0, -1, 0}, {0, 0, 1},  {0, 0, -1}};
                    for (const auto& dd : d) {
                        const int nx2 = cx + dd[0], ny2 = cy + dd[1], nz2 = cz + dd[2];
                        if (nx2 < 0 || nx2 >= spec_.nx || ny2 < 0 || ny2 >= spec_.ny || nz2 < 0 ||
                            nz2 >= spec_.nz)
                            continue;
                        const std::size_t ni = idx(nx2, ny2, nz2);
                        if (!allowed[ni] || comp[ni] != 0) continue;
                        comp[ni] = next_id;
                        frontier.push({nx2, ny2, nz2});
                    }
                }
            }
        }
    }
    n_components_ = next_id;

    // A primary belongs to the component of the allowed cell nearest to it.
    // This stays correct when the primary's own cell center lands above c on
    // a thin lobe; an empty search radius means the grid cannot resolve the
    // lobe at all, which is an error rather than a silent mislabel.
    const double d_l1 = lagrange_set(MassRatio(mu_)).moon_l1_distance();
    auto nearest_component = [&](const Vec3& primary, double radius_cap) {
        std::int32_t best = 0;
        double best_d2 = radius_cap * radius_cap;
        for (int iz = 0; iz < spec_.nz; ++iz)
            for (int iy = 0; iy < spec_.ny; ++iy)
                for (int ix = 0; ix < spec_.nx; ++ix) {
                    const std::size_t i0 = idx(ix, iy, iz);
                    if (!allowed[i0]) continue;
                    const Vec3 q = cell_center(ix, iy, iz) - primary;
                    const double d2 = dot(q, q);
                    if (d2 < best_d2) {
                        best_d2 = d2;
                        best = comp[i0];
                    }
                }
        return best;
    };
    const std::int32_t moon_comp = nearest_component(moon_position(), d_l1);
    const std::int32_t earth_comp = nearest_component(earth_position(), 1.0 - d_l1);
    if (moon_comp == 0 || earth_comp == 0)
        throw std::runtime_error("hill grid too coarse: no allowed cell inside a primary's "
                                 "lobe; raise the grid resolution");

    std::vector<HillComponentLabel> comp_label(static_cast<std::size_t>(next_id),
                                               HillComponentLabel::Unbounded);
    for (std::int32_t id = 1; id <= next_id; ++id) {
        const std::size_t k = static_cast<std::size_t>(id - 1);
        if (id == moon_comp && id == earth_comp) {
            comp_label[k] = HillComponentLabel::MoonEarthMerged;
            merged_ = true;
        } else if (id == moon_comp) {
            comp_label[k] = HillComponentLabel::MoonBounded;
        } else if (id == earth_comp) {
            comp_label[k] = HillComponentLabel::EarthBounded;
        } else if (touches_rim[k]) {
            comp_label[k] = HillComponentLabel::Unbounded;
        }
    }

    for (std::size_t i = 0; i < n; ++i)
        label_[i] = comp[i] == 0 ? 0 : static_cast<std::uint8_t>(comp_label[comp[i] - 1]);
}

HillComponentLabel HillGrid::cell_label(int ix, int iy, int iz) const {
    return static_cast<HillComponentLabel>(label_[idx(ix, iy, iz)]);
}

HillComponentLabel HillGrid::classify(const Vec3& q) const {
    const int ix = static_cast<int>((q[0] - spec_.x0) / (spec_.x1 - spec_.x0) * spec_.nx);
    const int iy = static_cast<int>((q[1] - spec_.y0) / (spec_.y1 - spec_.y0) * spec_.ny);
    const int iz = static_cast<int>((q[2] - spec_.z0) / (spec_.z1 - spec_.z0) * spec_.nz);
    if (ix < 0 || ix >= spec_.nx || iy < 0 || iy >= spec_.ny || iz < 0 || iz >= spec_.nz) {
        return eval_U(q, MassRatio(mu_)) <= c_ ? HillComponentLabel::Unbounded
                                               : HillComponentLabel::Forbidden;
    }
    return cell_label(ix, iy, iz);
}

void HillGrid::write_csv(std::ostream& os) const {
    os << "q1,q2,q3,label\n";
    for (int iz = 0; iz < spec_.nz; ++iz)
        for (int iy = 0; iy < spec_.ny; ++iy)
            for (int ix = 0; ix < spec_.nx; ++ix) {
                const auto lab = cell_label(ix, iy, iz);
                if (lab == HillComponentLabel::Forbidden) continue;
                const Vec3 q = cell_center(ix, iy, iz);
                os << q[0] << ',' << q[1] << ',' << q[2] << ',' << to_string(lab) << '\n';
            }
}

PointClassification classify_point(const Vec3& q, const EnergyLevel& c, const MassRatio& mu,
                                   const HillGridSpec& spec, double boundary_tol) {
    const double u = eval_U(q, mu);
    PointClassification out{};
    out.u_value = u;
    out.near_boundary = std::abs(u - c.value()) < boundary_tol;
    if (u > c.value()) {
        out.label = HillComponentLabel::Forbidden;
        return out;
    }
    const HillGrid grid(c, mu, spec);
    out.label = grid.classify(q);
    return out;
}

double zero_velocity_radius(double theta, double phi, const EnergyLevel& c, const MassRatio& mu,
                            double d) {
    const double ct = std::cos(theta), st = std::sin(theta);
    const double sf = std::sin(phi), cf = std::cos(phi);
    const Vec3 dir{ct * sf, st * sf, cf};
    auto u_at = [&](double rho) { return eval_U(rho * dir, mu); };

    double lo = 1e-9;
    double hi = d;
    if (!(u_at(hi) > c.value()))
        throw std::runtime_error("zero_velocity_radius: U(d) <= c along this ray; "
                                 "the Moon boundary is not inside the ball");
    while (u_at(lo) > c.value()) lo *= 0.5; // paranoia; U -> -inf at the Moon

    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (u_at(mid) <= c.value())
            lo = mid;
        else
            hi = mid;
        if (hi - lo < 1e-15) break;
    }
    double rho = 0.5 * (lo + hi);
    for (int it = 0; it < 50; ++it) {
        const double f = u_at(rho) - c.value();
        if (std::abs(f) < 1e-12) break;
        double w = ct * sf;
        double s2f = sf * sf;
        double du;
        kernels::du_drho(&rho, &w, &s2f, 1, mu.value(), &du);
        const double rn = rho - f / du;
        if (!(rn > 0.0 && rn < d)) break;
        rho = rn;
    }
    return rho;
}

double du_dtheta(double rho, double theta, double phi, const MassRatio& mr) {
    const double mu = mr.value();
    const double a = rho * rho - 2.0 * rho * std::cos(theta) * std::sin(phi) + 1.0;
    return (1.0 - mu) * rho * (1.0 / (a * std::sqrt(a)) - 1.0) * std::sin(theta) * std::sin(phi);
}

double du_dphi(double rho, double theta, double phi, const MassRatio& mr) {
    const double mu = mr.value();
    const double ct = std::cos(theta), st = std::sin(theta);
    const double sf = std::sin(phi), cf = std::cos(phi);
    const double a = rho * rho - 2.0 * rho * ct * sf + 1.0;
    return -(1.0 - mu) * rho * ct * cf / (a * std::sqrt(a)) -
           (rho * ct * sf - 1.0 + mu) * rho * ct * cf - rho * rho * st * st * sf * cf;
}

namespace {

double u_sph(double rho, double theta, double phi, const MassRatio& mu) {
    return eval_U(from_spherical({rho, theta, phi}), mu);
}

} // namespace

double circle_min_theta(double rho, double phi, const MassRatio& mu) {
    // Grid argmin, then Newton on dU/dtheta.
    const int n = 256;
    double best_t = 0.0, best_u = u_sph(rho, 0.0, phi, mu);
    for (int i = 1; i < n; ++i) {
        const double t = 2.0 * kPi * i / n;
        const double u = u_sph(rho, t, phi, mu);
        if (u < best_u) {
            best_u = u;
            best_t = t;
        }
    }
    double t = best_t;
    for (int it = 0; it < 60; ++it) {
        const double g = du_dtheta(rho, t, phi, mu);
        if (std::abs(g) < 1e-14) break;
        const double eps = 1e-6;
        const double gp = du_dtheta(rho, t + eps, phi, mu);
        const double gm = du_dtheta(rho, t - eps, phi, mu);
        const double h = (gp - gm) / (2.0 * eps);
        if (!(h > 0.0)) break; // keep to minima
        t -= g / h;
    }
    if (t < 0.0) t += 2.0 * kPi;
    if (t >= 2.0 * kPi) t -= 2.0 * kPi;
    return t;
}

SphereMinResult sphere_min_U(double rho, const MassRatio& mu) {
    if (!(rho > 0.0 && rho < 1.0)) throw std::domain_error("sphere_min_U requires rho in (0,1)");

    // Dense grid (deliberately offset from the symmetry axes), then a 2-D
    // Newton polish on the spherical gradient.
    const int nt = 91, nf = 47;
    double bt = 0.0, bf = 0.5 * kPi, bu = 1e300;
    for (int i = 0; i < nt; ++i) {
        const double t = 2.0 * kPi * (i + 0.37) / nt;
        for (int j = 0; j < nf; ++j) {
            const double f = kPi * (j + 0.61) / nf;
            const double u = u_sph(rho, t, f, mu);
            if (u < bu) {
                bu = u;
                bt = t;
                bf = f;
            }
        }
    }

    // Alternating golden-section descent inside the winning grid cell; a
    // derivative-free polish cannot jump to the interior saddle pair the way
    // a raw Newton step can when the Earth-side minimum is sharp.
    const double golden = 0.6180339887498949;
    auto line_min = [&](auto f1d, double lo, double hi) {
        double x1 = hi - golden * (hi - lo);
        double x2 = lo + golden * (hi - lo);
        double f1 = f1d(x1), f2 = f1d(x2);
        for (int it = 0; it < 90; ++it) {
            if (f1 < f2) {
                hi = x2;
                x2 = x1;
                f2 = f1;
                x1 = hi - golden * (hi - lo);
                f1 = f1d(x1);
            } else {
                lo = x1;
                x1 = x2;
                f1 = f2;
                x2 = lo + golden * (hi - lo);
                f2 = f1d(x2);
            }
        }
        return 0.5 * (lo + hi);
    };

    double t = bt, f = bf;
    const double wt = 2.0 * kPi / nt;
    const double wf = kPi / nf;
    for (int round = 0; round < 8; ++round) {
        t = line_min([&](double x) { return u_sph(rho, x, f, mu); }, t - 1.5 * wt, t + 1.5 * wt);
        f = line_min([&](double x) { return u_sph(rho, t, x, mu); }, f - 1.5 * wf, f + 1.5 * wf);
    }
    // Guarded Newton polish: accepted only while it keeps lowering U and
    // stays inside the cell, which rules out the saddle jumps a raw Newton
    // start from the grid could take.
    for (int it = 0; it < 12; ++it) {
        const double gt = du_dtheta(rho, t, f, mu);
        const double gf = du_dphi(rho, t, f, mu);
        if (std::hypot(gt, gf) < 1e-14) break;
        const double eps = 1e-7;
        const double j11 = (du_dtheta(rho, t + eps, f, mu) - du_dtheta(rho, t - eps, f, mu)) / (2 * eps);
        const double j12 = (du_dtheta(rho, t, f + eps, mu) - du_dtheta(rho, t, f - eps, mu)) / (2 * eps);
        const double j21 = (du_dphi(rho, t + eps, f, mu) - du_dphi(rho, t - eps, f, mu)) / (2 * eps);
        const double j22 = (du_dphi(rho, t, f + eps, mu) - du_dphi(rho, t, f - eps, mu)) / (2 * eps);
        const double det = j11 * j22 - j12 * j21;
        if (std::abs(det) < 1e-16) break;
        const double dt = (j22 * gt - j12 * gf) / det;
        const double df = (-j21 * gt + j11 * gf) / det;
        if (std::abs(dt) > wt || std::abs(df) > wf) break;
        if (u_sph(rho, t - dt, f - df, mu) > u_sph(rho, t, f, mu)) break;
        t -= dt;
        f -= df;
    }
    // Wrap near-2pi results back to the principal value.
    if (t > kPi) t -= 2.0 * kPi;
    if (t < -kPi) t += 2.0 * kPi;
    return {t, f, u_sph(rho, t, f, mu)};
}

std::vector<std::pair<double, bool>> great_circle_critical_points(double rho, const MassRatio& mu) {
    // Great circle (rho cos(phi), 0, rho sin(phi)); dU/dphi has the product
    // form rho sin(phi) * (second factor), so critical points are sign
    // changes of that expression plus the axis points phi = 0, pi.
    auto dudphi = [&](double phi) {
        const double m = mu.value();
        const double a = rho * rho - 2.0 * rho * std::cos(phi) + 1.0;
        const double second = (1.0 - m) / (a * std::sqrt(a)) + rho * std::cos(phi) - 1.0 + m;
        return rho * std::sin(phi) * second;
    };
    auto u_gc = [&](double phi) { return eval_U({rho * std::cos(phi), 0.0, rho * std::sin(phi)}, mu); };

    std::vector<double> roots;
    const int n = 4096;
    double p0 = 1e-9, f0 = dudphi(p0);
    for (int i = 1; i <= n; ++i) {
        const double p1 = 2.0 * kPi * i / n;
        const double f1 = dudphi(p1);
        if ((f0 < 0.0) != (f1 < 0.0)) {
            double lo = p0, hi = p1;
            for (int it = 0; it < 100; ++it) {
                const double mid = 0.5 * (lo + hi);
                if ((dudphi(mid) < 0.0) == (f0 < 0.0))
                    lo = mid;
                else
                    hi = mid;
            }
            roots.push_back(0.5 * (lo + hi));
        }
        p0 = p1;
        f0 = f1;
    }
    // phi = 0 is a critical point by the sin factor; the scan above starts
    // just after it, so add it explicitly.
    roots.push_back(0.0);
    std::sort(roots.begin(), roots.end());
    roots.erase(std::unique(roots.begin(), roots.end(),
                            [](double a, double b) { return std::abs(a - b) < 1e-7; }),
                roots.end());
    // Merge 2*pi with 0.
    while (!roots.empty() && roots.back() > 2.0 * kPi - 1e-7) roots.pop_back();

    std::vector<std::pair<double, bool>> out;
    for (double p : roots) {
        const double eps = 1e-4;
        const bool is_min = u_gc(p) < u_gc(p - eps) && u_gc(p) < u_gc(p + eps);
        out.emplace_back(p, is_min);
    }
    return out;
}

} // namespace crtbp
