#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "arkan/series.hpp"

namespace arkan {

/// Additive split x = trend + seasonal + residual.
struct DecompositionResult {
    std::vector<double> trend;
    std::vector<double> seasonal;
    std::vector<double> residual;
    std::size_t period = 0;
};

struct PeriodEstimate {
    std::size_t period = 0;      // 0: no autocorrelation peak (aperiodic)
    double acf_peak_value = 0.0; // r(period) / r(0), 0 when aperiodic
    bool weak = false;
};

struct PeriodicityReport {
    double strength = 0.0;
    std::size_t period = 0;
    double acf_peak_value = 0.0;
    bool weak_peak = false;
};

/// Peaks of r(l) with r(l) / r(0) below this floor are weak regardless of sample size.
inline constexpr double kWeakPeakFloor = 0.1;

/// Dominant period from the autocorrelation of the standardized series.
///
/// The 1/(N-l) autocorrelation is computed up to lag N/2. Candidates are its
/// local maxima at lag l >= 2 (r(l) > r(l-1) and r(l) >= r(l+1)); the chosen
/// one maximizes r(l) (N-l)/N, so equal correlations favour the shorter lag.
/// A peak is weak when r(l)/r(0) < max(0.1, 4/sqrt(N-l)).
[[nodiscard]] PeriodEstimate estimate_period(const TimeSeries& ts);

/// Period only; 0 when the autocorrelation has no local maximum.
[[nodiscard]] std::size_t detect_period(const TimeSeries& ts);

/// Classical additive decomposition.
///
/// The trend is a centered moving average over `period` samples (half weights
/// at both ends for even periods), undefined within half a window of either
/// end. The seasonal pattern is the per-phase mean of x - trend over positions
/// where the trend is defined, shifted to zero mean and tiled. Undefined trend
/// values are then filled with the nearest defined one, and the residual is
/// what remains.
[[nodiscard]] DecompositionResult seasonal_decompose(std::span<const double> x, std::size_t period);
[[nodiscard]] DecompositionResult seasonal_decompose(const TimeSeries& ts, std::size_t period);

/// ||seasonal||^2 / ||z||^2 for the standardized series z, clamped to [0, 1].
/// Aperiodic series and weak peaks score 0.
[[nodiscard]] PeriodicityReport periodicity_strength(const TimeSeries& ts);

/// Mean squared error between equal-length, non-empty vectors.
[[nodiscard]] double mse(std::span<const double> pred, std::span<const double> actual);

}  // namespace arkan
