#pragma once

#include "crtbp/types.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>

namespace crtbp {

/// Counter-friendly deterministic generator (splitmix64). Sample i of a run is
/// a pure function of (seed, i), so enlarging a sample set keeps the existing
/// samples identical; certificate refinement is nested by construction.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    static Rng for_sample(std::uint64_t seed, std::uint64_t index) {
        return Rng(mix(seed ^ (0x9E3779B97F4A7C15ULL + index * 0xBF58476D1CE4E5B9ULL)));
    }

    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    /// Uniform double in [0,1).
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    /// Uniform double in [a,b).
    double uniform(double a, double b) { return a + (b - a) * uniform(); }

    /// Uniform direction on the 2-sphere.
    Vec3 unit_vec3() {
        const double z = 2.0 * uniform() - 1.0;
        const double t = 2.0 * kPi * uniform();
        const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
        return {r * std::cos(t), r * std::sin(t), z};
    }

    /// Uniform direction on the 3-sphere (Marsaglia double-disc method).
    Vec4 unit_vec4() {
        double a1, a2, s1;
        do {
            a1 = 2.0 * uniform() - 1.0;
            a2 = 2.0 * uniform() - 1.0;
            s1 = a1 * a1 + a2 * a2;
        } while (s1 >= 1.0 || s1 == 0.0);
        double b1, b2, s2;
        do {
            b1 = 2.0 * uniform() - 1.0;
            b2 = 2.0 * uniform() - 1.0;
            s2 = b1 * b1 + b2 * b2;
        } while (s2 >= 1.0 || s2 == 0.0);
        const double w = std::sqrt((1.0 - s1) / s2);
        return {a1, a2, b1 * w, b2 * w};
    }

    /// Point uniform in the ball of given radius (strictly inside, never the center).
    Vec3 ball_point(double radius) {
        double u = uniform();
        while (u == 0.0) u = uniform();
        return std::cbrt(u) * radius * unit_vec3();
    }

  private:
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
        return z ^ (z >> 31);
    }

    std::uint64_t state_;
};

} // namespace crtbp
