#include "arkan/synth.hpp"

#include <cmath>
#include <vector>

#include "arkan/error.hpp"
#include "arkan/random.hpp"

namespace arkan {

std::string to_string(SynthFunction f) { return f == SynthFunction::F1 ? "f1" : "f2"; }

SynthFunction parse_synth_function(std::string_view name) {
    if (name == "f1") return SynthFunction::F1;
    if (name == "f2") return SynthFunction::F2;
    throw InvalidArgument("unknown function '" + std::string(name) + "' (expected f1|f2)");
}

double synth_value(SynthFunction f, double t) noexcept {
    using std::numbers::e;
    using std::numbers::pi;
    return f == SynthFunction::F1 ? std::cos(2.0 * t) + std::cos(2.0 * pi * t)
                                  : std::sin(3.0 * t) + std::sin(2.0 * e * t);
}

void SynthSpec::validate() const {
    if (!(sigma >= 0.0) || !std::isfinite(sigma)) {
        throw InvalidArgument("sigma must be a finite value >= 0");
    }
    if (n_samples < 2) {
        throw InvalidArgument("n_samples must be at least 2");
    }
    if (!(t_max > 0.0) || !std::isfinite(t_max)) {
        throw InvalidArgument("t_max must be positive");
    }
}

TimeSeries sample(const SynthSpec& spec) {
    spec.validate();
    NormalSampler rng(spec.seed);
    const double denom = static_cast<double>(spec.n_samples - 1);
    std::vector<double> values(spec.n_samples);
    for (std::size_t j = 0; j < spec.n_samples; ++j) {
        const double t = static_cast<double>(j) * spec.t_max / denom;
        values[j] = synth_value(spec.function, t);
        if (spec.sigma > 0.0) {
            values[j] += spec.sigma * rng.normal();
        }
    }
    return TimeSeries(std::move(values), 0.0, spec.t_max / denom, to_string(spec.function));
}

}  // namespace arkan
