#pragma once

#include <filesystem>
#include <optional>

#include "arkan/models.hpp"
#include "json.hpp"

namespace arkan::cli {

/// Run configuration read from a JSON file.
///
/// The top level is a flat object with the TrainConfig keys (learning_rate,
/// max_epochs, patience, val_fraction, seed, adam_beta1, adam_beta2, adam_eps)
/// and the model keys (p, kan_hidden, grid {lo, hi, intervals, degree},
/// base_activation, mlp_hidden, memory_d, arima_d, arima_q). An object under a
/// variant tag ("ar_kan", "ar_mlp", "kan", "mlp", "arima") overrides those keys
/// for that variant only. Unknown keys and mistyped values raise InvalidArgument.
class RunConfig {
public:
    RunConfig() = default;
    explicit RunConfig(nlohmann::json doc);

    [[nodiscard]] static RunConfig load(const std::filesystem::path& path);

    /// Effective configuration for `variant`; `seed`, when given, replaces the training seed.
    [[nodiscard]] ModelConfig resolve(Variant variant, std::optional<std::uint64_t> seed = std::nullopt) const;

private:
    nlohmann::json doc_ = nlohmann::json::object();
};

}  // namespace arkan::cli
