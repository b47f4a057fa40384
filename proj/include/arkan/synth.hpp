#pragma once

#include <cstddef>
#include <cstdint>
#include <numbers>
#include <string>

#include "arkan/series.hpp"

namespace arkan {

/// f1(t) = cos(2t) + cos(2 pi t), f2(t) = sin(3t) + sin(2 e t).
enum class SynthFunction { F1, F2 };

[[nodiscard]] std::string to_string(SynthFunction f);
[[nodiscard]] SynthFunction parse_synth_function(std::string_view name);

/// Noiseless value of the benchmark function at t.
[[nodiscard]] double synth_value(SynthFunction f, double t) noexcept;

struct SynthSpec {
    SynthFunction function = SynthFunction::F1;
    double sigma = 0.0;
    std::size_t n_samples = 500;
    double t_max = 8.0 * std::numbers::pi;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Samples t_j = j * t_max / (n - 1), j = 0 .. n-1, and adds i.i.d. N(0, sigma^2)
/// noise from NormalSampler(seed). The series carries t0 = 0 and dt.
[[nodiscard]] TimeSeries sample(const SynthSpec& spec);

}  // namespace arkan
