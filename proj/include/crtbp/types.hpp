#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <stdexcept>

namespace crtbp {

using Vec3 = std::array<double, 3>;
using Vec6 = std::array<double, 6>;
using Vec4 = std::array<double, 4>;
using Vec8 = std::array<double, 8>;

inline Vec3 operator+(const Vec3& a, const Vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline Vec3 operator-(const Vec3& a, const Vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline Vec3 operator*(double s, const Vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }
inline double dot(const Vec3& a, const Vec3& b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }
inline double norm(const Vec3& a) { return std::sqrt(dot(a, a)); }
inline Vec3 cross(const Vec3& a, const Vec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

inline double dot(const Vec4& a, const Vec4& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3];
}
inline double norm(const Vec4& a) { return std::sqrt(dot(a, a)); }

template <std::size_t N>
inline double dotn(const std::array<double, N>& a, const std::array<double, N>& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < N; ++i) s += a[i] * b[i];
    return s;
}

template <std::size_t N>
inline double normn(const std::array<double, N>& a) {
    return std::sqrt(dotn(a, a));
}

/// Mass ratio mu = m_M / (m_E + m_M), constrained to (0,1).
class MassRatio {
  public:
    explicit MassRatio(double mu) : mu_(mu) {
        if (!(mu > 0.0 && mu < 1.0)) throw std::domain_error("mass ratio must lie in (0,1)");
    }
    double value() const { return mu_; }

  private:
    double mu_;
};

/// Phase point (q,p) in the synodical frame with the Moon at the origin
/// and the Earth at e = (1,0,0).
struct RotatingState {
    Vec3 q{0.0, 0.0, 0.0};
    Vec3 p{0.0, 0.0, 0.0};

    Vec6 flat() const { return {q[0], q[1], q[2], p[0], p[1], p[2]}; }
    static RotatingState from_flat(const Vec6& z) {
        return {{z[0], z[1], z[2]}, {z[3], z[4], z[5]}};
    }
};

struct SphericalCoords {
    double rho = 0.0;   // radius, > 0
    double theta = 0.0; // azimuth in [0, 2*pi)
    double phi = 0.0;   // polar angle in [0, pi]
};

/// Jacobi energy level. All analyses in this toolkit run below -1.
class EnergyLevel {
  public:
    explicit EnergyLevel(double c) : c_(c) {
        if (!(c < -1.0)) throw std::domain_error("energy level must satisfy c < -1");
    }
    double value() const { return c_; }

  private:
    double c_;
};

/// Row-major symmetric-friendly 6x6 matrix.
struct Mat6 {
    std::array<double, 36> a{};
    double& operator()(int i, int j) { return a[static_cast<std::size_t>(6 * i + j)]; }
    double operator()(int i, int j) const { return a[static_cast<std::size_t>(6 * i + j)]; }
};

inline Vec6 mat6_apply(const Mat6& m, const Vec6& x) {
    Vec6 y{};
    for (int i = 0; i < 6; ++i) {
        double s = 0.0;
        for (int j = 0; j < 6; ++j) s += m(i, j) * x[static_cast<std::size_t>(j)];
        y[static_cast<std::size_t>(i)] = s;
    }
    return y;
}

inline constexpr double kPi = 3.14159265358979323846;

} // namespace crtbp
