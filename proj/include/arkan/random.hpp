#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>

namespace arkan {

/// Seeded normal sampler with a fully specified algorithm.
///
/// Uniforms come from std::mt19937_64 (whose output sequence is fixed by the
/// C++ standard) using the top 53 bits, and normals from the basic
/// Box-Muller transform, consuming two uniforms per pair of normals. The
/// standard library's normal_distribution is avoided because its algorithm
/// is implementation-defined.
class NormalSampler {
public:
    explicit NormalSampler(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on the open interval (0, 1).
    double uniform() {
        // 53 random mantissa bits, offset by half an ulp so 0 is never produced.
        return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
    }

    double normal() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        const double u1 = uniform();
        const double u2 = uniform();
        const double radius = std::sqrt(-2.0 * std::log(u1));
        const double angle = 2.0 * std::numbers::pi * u2;
        spare_ = radius * std::sin(angle);
        has_spare_ = true;
        return radius * std::cos(angle);
    }

    double normal(double mean, double stddev) { return mean + stddev * normal(); }

private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace arkan
