#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace arkan {

/// Univariate, uniformly indexed series of finite real samples.
class TimeSeries {
public:
    /// Throws InvalidArgument when `values` is empty, holds a non-finite
    /// entry, or `dt` is present but not strictly positive.
    explicit TimeSeries(std::vector<double> values, std::optional<double> t0 = std::nullopt,
                        std::optional<double> dt = std::nullopt, std::string name = {});

    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }
    [[nodiscard]] double operator[](std::size_t i) const { return values_[i]; }
    [[nodiscard]] const std::optional<double>& t0() const noexcept { return t0_; }
    [[nodiscard]] const std::optional<double>& dt() const noexcept { return dt_; }
    [[nodiscard]] const std::string& name() const noexcept { return name_; }

    /// Samples [first, first + count) as a new series; the time axis is shifted accordingly.
    [[nodiscard]] TimeSeries slice(std::size_t first, std::size_t count) const;

    friend bool operator==(const TimeSeries&, const TimeSeries&) = default;

private:
    std::vector<double> values_;
    std::optional<double> t0_;
    std::optional<double> dt_;
    std::string name_;
};

struct StandardizationStats {
    double mean = 0.0;
    double std = 1.0;

    /// Throws InvalidArgument unless mean is finite and std is finite and > 0.
    void validate() const;

    [[nodiscard]] double forward(double x) const noexcept { return (x - mean) / std; }
    [[nodiscard]] double inverse(double y) const noexcept { return y * std + mean; }
};

enum class Direction { Forward, Inverse };

/// Supervised (lag window -> next value) pairs, stored row-major.
///
/// Row m holds [x(n), x(n-1), ..., x(n-p+1)] and targets[m] = x(n+1).
struct WindowDataset {
    std::size_t lag = 0;
    std::vector<double> inputs;
    std::vector<double> targets;

    [[nodiscard]] std::size_t size() const noexcept { return targets.size(); }
    [[nodiscard]] std::span<const double> row(std::size_t m) const {
        return std::span<const double>(inputs).subspan(m * lag, lag);
    }
    [[nodiscard]] std::span<double> row(std::size_t m) {
        return std::span<double>(inputs).subspan(m * lag, lag);
    }
};

/// Reads a CSV with a header row holding a `value` column and an optional `t` column.
[[nodiscard]] TimeSeries load_csv(const std::filesystem::path& path);

/// Parses CSV text (same format as load_csv); `origin` names the source in errors.
[[nodiscard]] TimeSeries parse_csv(std::string_view text, const std::string& origin = "<memory>");

/// Writes `t,value` when the series carries a time axis, `value` otherwise.
void write_csv(const TimeSeries& ts, const std::filesystem::path& path);

/// Shortest decimal form that reads back to the same double.
[[nodiscard]] std::string format_double(double x);

/// Mean and population (1/N) standard deviation; throws DegenerateSeries on a constant series.
[[nodiscard]] StandardizationStats fit_standardize(const TimeSeries& train);

[[nodiscard]] TimeSeries apply_standardize(const TimeSeries& ts, const StandardizationStats& stats,
                                           Direction direction = Direction::Forward);

/// First floor(ratio * N) samples and the remainder.
[[nodiscard]] std::pair<TimeSeries, TimeSeries> split(const TimeSeries& ts, double ratio);

/// Index of the first test sample for `split(ts, ratio)` on a series of length n.
[[nodiscard]] std::size_t split_point(std::size_t n, double ratio);

/// Windows of `lag` samples (most recent first) with the following sample as target.
/// With `context`, windows for the first samples of `ts` may reach back into it, and only
/// samples of `ts` are used as targets.
[[nodiscard]] WindowDataset make_windows(std::span<const double> ts, std::size_t lag,
                                         std::span<const double> context = {});
[[nodiscard]] WindowDataset make_windows(const TimeSeries& ts, std::size_t lag,
                                         const TimeSeries* context = nullptr);

/// First difference x(n) - x(n-1); output is one shorter than the input.
[[nodiscard]] std::vector<double> difference(std::span<const double> x);

}  // namespace arkan
