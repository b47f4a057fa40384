#pragma once

#include <filesystem>

#include "json.hpp"

#include "arkan/models.hpp"

namespace arkan {

inline constexpr int kModelFormatVersion = 1;

/// Model document:
///
///   { "format_version": 1, "variant": "ar_kan", "p": 20,
///     "stats": {"mean": m, "std": s},
///     "memory": {"p": 20, "d": 0, "coeffs": [...]},             // ar_kan, ar_mlp
///     "kan": {"widths": [...], "grid": {"lo", "hi", "intervals", "degree"},
///             "base_activation": "silu", "edges": [...]},        // ar_kan, kan
///     "mlp": {"widths": [...], "activation": "relu",
///             "parameters": [...]},                              // ar_mlp, mlp
///     "arima": {"p", "d", "q", "phi", "theta", "residual_history"} }
///
/// KAN "edges" lists, layer by layer and edge (i, j) in row-major order, the
/// G + k spline coefficients followed by base_weight and mix_weight. MLP
/// "parameters" lists, per layer, W (row-major, out x in) then b.
[[nodiscard]] nlohmann::json model_to_json(const ForecastModel& model);

/// Throws ParseError on a malformed or inconsistent document.
[[nodiscard]] ForecastModel model_from_json(const nlohmann::json& doc);

void save_model(const ForecastModel& model, const std::filesystem::path& path);
[[nodiscard]] ForecastModel load_model(const std::filesystem::path& path);

}  // namespace arkan
