#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "arkan/armemory.hpp"
#include "arkan/kan.hpp"
#include "arkan/nn.hpp"
#include "arkan/series.hpp"

namespace arkan {

enum class Variant { ArKan, ArMlp, Kan, Mlp, Arima };

inline constexpr Variant kAllVariants[] = {Variant::Arima, Variant::ArKan, Variant::ArMlp, Variant::Kan,
                                           Variant::Mlp};

/// "ar_kan", "ar_mlp", "kan", "mlp", "arima".
[[nodiscard]] std::string to_string(Variant v);
/// Display name used in reports: "AR-KAN", "ARIMA", ...
[[nodiscard]] std::string display_name(Variant v);
/// Accepts the snake_case tags and their dashed spellings ("ar-kan").
[[nodiscard]] Variant parse_variant(std::string_view name);

/// ARMA(p, q) on the d-times differenced series.
///
/// w(n) = sum_i phi[i] w(n-1-i) + sum_j theta[j] e(n-1-j) + e(n).
struct ArimaModel {
    std::size_t p = 0;
    int d = 0;
    std::size_t q = 0;
    std::vector<double> phi;
    std::vector<double> theta;
    /// Last q innovations of the training series (most recent last).
    std::vector<double> residual_history;

    /// Fitted baselines carry q in {1, 2}; `allow_pure_ar` admits q = 0 for direct estimation.
    void validate(bool allow_pure_ar = false) const;
};

struct ArKanModel {
    ArModel memory;
    KanNetwork net;
};

struct ArMlpModel {
    ArModel memory;
    MlpNetwork net;
};

struct PlainKanModel {
    KanNetwork net;
};

struct PlainMlpModel {
    MlpNetwork net;
};

using ModelPayload = std::variant<ArKanModel, ArMlpModel, PlainKanModel, PlainMlpModel, ArimaModel>;

/// A fitted one-step forecaster together with the standardization of its training series.
struct ForecastModel {
    ModelPayload payload;
    StandardizationStats stats;
    std::size_t p = 20;

    [[nodiscard]] Variant variant() const noexcept;
    /// Shortest history forecast_one_step accepts.
    [[nodiscard]] std::size_t min_history() const noexcept;
    void validate() const;
};

/// Hyperparameters for every variant; defaults follow the reference configurations.
struct ModelConfig {
    TrainConfig train;
    std::size_t p = 20;
    std::vector<std::size_t> kan_hidden{50};
    SplineGrid grid{};
    BaseActivation base_activation = BaseActivation::Silu;
    std::vector<std::size_t> mlp_hidden{128, 256, 128};
    /// Differencing applied before the AR memory of ar_kan / ar_mlp.
    int memory_d = 0;
    std::vector<int> arima_d{0, 1};
    std::vector<std::size_t> arima_q{1, 2};
};

struct FitResult {
    ForecastModel model;
    std::optional<TrainHistory> history;  // absent for arima
};

/// Standardize, fit and freeze AR(p) memory, train a [p, hidden..., 1] KAN on the filtered windows.
[[nodiscard]] FitResult fit_ar_kan(const TimeSeries& train, const ModelConfig& config = {});
/// Same memory with an MLP head.
[[nodiscard]] FitResult fit_ar_mlp(const TimeSeries& train, const ModelConfig& config = {});
/// KAN or MLP on raw standardized lag windows.
[[nodiscard]] FitResult fit_plain(Variant variant, const TimeSeries& train, const ModelConfig& config = {});

/// ARIMA baseline: for every (d, q) candidate, Hannan-Rissanen estimation on the
/// first 80% of the training split, scored by teacher-forced one-step MSE on
/// the last 20%; the winner (ties keep the earlier candidate) is refit on the
/// whole training split. Candidates that cannot be estimated are skipped, and
/// if the refit of the winner fails the next-ranked candidate is refit instead.
[[nodiscard]] FitResult fit_arima(const TimeSeries& train, const ModelConfig& config = {});

/// Hannan-Rissanen estimate of a fixed (p, d, q) on an already standardized series.
///
/// Stage one fits AR(max(min(40, N/4), p + q)) by Yule-Walker to obtain innovations;
/// stage two regresses w(n) on p lags of w and q lags of those innovations by
/// least squares. q = 0 reduces to least-squares AR. MA roots inside the unit
/// circle are reflected to their reciprocals so the result is invertible. A
/// rank-deficient design or an MA root on the unit circle raises EstimationError.
[[nodiscard]] ArimaModel fit_arima_order(std::span<const double> standardized, std::size_t p, int d,
                                         std::size_t q);

/// Dispatches to the fit function of `variant`.
[[nodiscard]] FitResult fit_model(Variant variant, const TimeSeries& train, const ModelConfig& config = {});

/// One-step forecasts (standardized units) of z(n) for n in [p + d, z.size()], teacher-forced on z.
/// Entry k of the result is the forecast of z(p + d + k); the last entry forecasts past the end.
[[nodiscard]] std::vector<double> arima_one_step(const ArimaModel& model, std::span<const double> z);

/// Next-value forecast in original units from `history` (original units).
[[nodiscard]] double forecast_one_step(const ForecastModel& model, std::span<const double> history);
[[nodiscard]] double forecast_one_step(const ForecastModel& model, const TimeSeries& history);

/// Forecasts of series[n] from series[0..n) for n = min_history() .. N-1.
[[nodiscard]] std::vector<double> fitted_values(const ForecastModel& model, const TimeSeries& series);

struct Evaluation {
    double test_mse = 0.0;             // standardized units
    std::vector<double> predictions;   // original units, one per test sample
    std::size_t n_test = 0;
};

using Predictor = std::function<double(std::span<const double> history)>;

/// Rolling teacher-forced one-step forecasts over the test part of `series`;
/// MSE is taken after standardizing predictions and actuals with `stats`.
[[nodiscard]] Evaluation evaluate_predictor(const Predictor& predictor, const StandardizationStats& stats,
                                            const TimeSeries& series, double split_ratio = 0.8,
                                            std::size_t min_history = 1);
[[nodiscard]] Evaluation evaluate(const ForecastModel& model, const TimeSeries& series,
                                  double split_ratio = 0.8);

}  // namespace arkan
