#include "arkan/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "arkan/armemory.hpp"
#include "arkan/error.hpp"
#include "arkan/nn.hpp"

namespace arkan {

namespace {

constexpr std::size_t kMinLength = 8;

std::vector<double> standardized(const TimeSeries& ts) {
    const auto stats = fit_standardize(ts);
    std::vector<double> z(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) {
        z[i] = stats.forward(ts[i]);
    }
    return z;
}

void require_length(const TimeSeries& ts) {
    if (ts.size() < kMinLength) {
        throw InvalidArgument("periodicity analysis needs at least " + std::to_string(kMinLength) +
                              " samples, got " + std::to_string(ts.size()));
    }
}

}  // namespace

PeriodEstimate estimate_period(const TimeSeries& ts) {
    require_length(ts);
    const auto z = standardized(ts);
    const std::size_t n = z.size();
    const auto acf = autocorrelation(z, n / 2);
    const auto& r = acf.r;

    PeriodEstimate best;
    double best_score = -std::numeric_limits<double>::infinity();
    for (std::size_t lag = 2; lag + 1 < r.size(); ++lag) {
        if (!(r[lag] > r[lag - 1] && r[lag] >= r[lag + 1])) {
            continue;
        }
        const double score = r[lag] * static_cast<double>(n - lag) / static_cast<double>(n);
        if (score > best_score) {
            best_score = score;
            best.period = lag;
        }
    }
    if (best.period == 0) {
        return best;
    }
    best.acf_peak_value = r[best.period] / r[0];
    const double band = 4.0 / std::sqrt(static_cast<double>(n - best.period));
    best.weak = best.acf_peak_value < std::max(kWeakPeakFloor, band);
    return best;
}

std::size_t detect_period(const TimeSeries& ts) { return estimate_period(ts).period; }

DecompositionResult seasonal_decompose(std::span<const double> x, std::size_t period) {
    const std::size_t n = x.size();
    if (period < 2) {
        throw InvalidArgument("decomposition period must be at least 2");
    }
    if (n < 2 * period) {
        throw InvalidArgument("decomposition with period " + std::to_string(period) + " needs at least " +
                              std::to_string(2 * period) + " samples, got " + std::to_string(n));
    }

    // Moving-average weights: P equal weights for odd P, 2xP average for even P.
    std::vector<double> weights;
    if (period % 2 == 1) {
        weights.assign(period, 1.0 / static_cast<double>(period));
    } else {
        weights.assign(period + 1, 1.0 / static_cast<double>(period));
        weights.front() = weights.back() = 0.5 / static_cast<double>(period);
    }
    const std::size_t half = weights.size() / 2;
    const std::size_t first_valid = half;
    const std::size_t last_valid = n - 1 - half;

    DecompositionResult out;
    out.period = period;
    out.trend.assign(n, 0.0);
    for (std::size_t i = first_valid; i <= last_valid; ++i) {
        double acc = 0.0;
        for (std::size_t k = 0; k < weights.size(); ++k) {
            acc += weights[k] * x[i - half + k];
        }
        out.trend[i] = acc;
    }

    std::vector<double> phase_sum(period, 0.0);
    std::vector<std::size_t> phase_count(period, 0);
    for (std::size_t i = first_valid; i <= last_valid; ++i) {
        phase_sum[i % period] += x[i] - out.trend[i];
        ++phase_count[i % period];
    }
    std::vector<double> pattern(period);
    double pattern_mean = 0.0;
    for (std::size_t k = 0; k < period; ++k) {
        pattern[k] = phase_sum[k] / static_cast<double>(phase_count[k]);
        pattern_mean += pattern[k];
    }
    pattern_mean /= static_cast<double>(period);
    for (auto& v : pattern) {
        v -= pattern_mean;
    }

    for (std::size_t i = 0; i < first_valid; ++i) {
        out.trend[i] = out.trend[first_valid];
    }
    for (std::size_t i = last_valid + 1; i < n; ++i) {
        out.trend[i] = out.trend[last_valid];
    }
    out.seasonal.resize(n);
    out.residual.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.seasonal[i] = pattern[i % period];
        out.residual[i] = x[i] - out.trend[i] - out.seasonal[i];
    }
    return out;
}

DecompositionResult seasonal_decompose(const TimeSeries& ts, std::size_t period) {
    return seasonal_decompose(ts.values(), period);
}

PeriodicityReport periodicity_strength(const TimeSeries& ts) {
    const auto estimate = estimate_period(ts);
    PeriodicityReport report;
    report.period = estimate.period;
    report.acf_peak_value = estimate.acf_peak_value;
    report.weak_peak = estimate.weak;
    if (estimate.period == 0 || estimate.weak) {
        return report;
    }
    const auto z = standardized(ts);
    const auto parts = seasonal_decompose(z, estimate.period);
    double seasonal_energy = 0.0;
    double total_energy = 0.0;
    for (std::size_t i = 0; i < z.size(); ++i) {
        seasonal_energy += parts.seasonal[i] * parts.seasonal[i];
        total_energy += z[i] * z[i];
    }
    report.strength = std::clamp(seasonal_energy / total_energy, 0.0, 1.0);
    return report;
}

double mse(std::span<const double> pred, std::span<const double> actual) { return mse_loss(pred, actual).loss; }

}  // namespace arkan
