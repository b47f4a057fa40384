#include "arkan/models.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>

#include "arkan/error.hpp"

namespace arkan {

std::string to_string(Variant v) {
    switch (v) {
        case Variant::ArKan: return "ar_kan";
        case Variant::ArMlp: return "ar_mlp";
        case Variant::Kan: return "kan";
        case Variant::Mlp: return "mlp";
        case Variant::Arima: return "arima";
    }
    return "unknown";
}

std::string display_name(Variant v) {
    switch (v) {
        case Variant::ArKan: return "AR-KAN";
        case Variant::ArMlp: return "AR-MLP";
        case Variant::Kan: return "KAN";
        case Variant::Mlp: return "MLP";
        case Variant::Arima: return "ARIMA";
    }
    return "unknown";
}

Variant parse_variant(std::string_view name) {
    std::string key(name);
    std::replace(key.begin(), key.end(), '-', '_');
    std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) { return std::tolower(c); });
    for (Variant v : kAllVariants) {
        if (to_string(v) == key) {
            return v;
        }
    }
    throw InvalidArgument("unknown model '" + std::string(name) + "' (expected ar-kan|ar-mlp|kan|mlp|arima)");
}

void ArimaModel::validate(bool allow_pure_ar) const {
    if (p == 0 || phi.size() != p || theta.size() != q) {
        throw InvalidArgument("ARIMA coefficient counts do not match (p, q)");
    }
    if (d != 0 && d != 1) {
        throw InvalidArgument("ARIMA differencing degree must be 0 or 1");
    }
    if (!(q == 1 || q == 2 || (allow_pure_ar && q == 0))) {
        throw InvalidArgument("ARIMA MA order must be 1 or 2");
    }
    if (residual_history.size() > q) {
        throw InvalidArgument("ARIMA residual history longer than q");
    }
    for (double c : phi) {
        if (!std::isfinite(c)) throw InvalidArgument("ARIMA phi is not finite");
    }
    for (double c : theta) {
        if (!std::isfinite(c)) throw InvalidArgument("ARIMA theta is not finite");
    }
}

Variant ForecastModel::variant() const noexcept {
    return std::visit(
        [](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, ArKanModel>) return Variant::ArKan;
            else if constexpr (std::is_same_v<T, ArMlpModel>) return Variant::ArMlp;
            else if constexpr (std::is_same_v<T, PlainKanModel>) return Variant::Kan;
            else if constexpr (std::is_same_v<T, PlainMlpModel>) return Variant::Mlp;
            else return Variant::Arima;
        },
        payload);
}

namespace {

int differencing_of(const ModelPayload& payload) {
    return std::visit(
        [](const auto& m) -> int {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, ArKanModel> || std::is_same_v<T, ArMlpModel>) return m.memory.d;
            else if constexpr (std::is_same_v<T, ArimaModel>) return m.d;
            else return 0;
        },
        payload);
}

}  // namespace

std::size_t ForecastModel::min_history() const noexcept {
    return p + static_cast<std::size_t>(differencing_of(payload));
}

void ForecastModel::validate() const {
    stats.validate();
    if (p == 0) {
        throw InvalidArgument("model window length p must be positive");
    }
    std::visit(
        [this](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, ArimaModel>) {
                m.validate(true);
                if (m.p != p) throw InvalidArgument("ARIMA order differs from model p");
            } else {
                if constexpr (std::is_same_v<T, ArKanModel> || std::is_same_v<T, ArMlpModel>) {
                    m.memory.validate();
                    if (m.memory.order() != p) throw InvalidArgument("AR memory order differs from model p");
                }
                m.net.validate();
                if (m.net.input_size() != p || m.net.output_size() != 1) {
                    throw InvalidArgument("network must map p inputs to one output");
                }
            }
        },
        payload);
}

// ---------------------------------------------------------------------------

namespace {

std::vector<double> standardized_values(const TimeSeries& ts, const StandardizationStats& stats) {
    std::vector<double> z(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) {
        z[i] = stats.forward(ts[i]);
    }
    return z;
}

std::vector<std::size_t> network_widths(std::size_t p, const std::vector<std::size_t>& hidden) {
    std::vector<std::size_t> widths{p};
    widths.insert(widths.end(), hidden.begin(), hidden.end());
    widths.push_back(1);
    return widths;
}

void require_training_length(const TimeSeries& train, std::size_t p) {
    if (train.size() <= p + 2) {
        throw InvalidArgument("training series of length " + std::to_string(train.size()) +
                              " is too short for window " + std::to_string(p) + " (needs more than " +
                              std::to_string(p + 2) + ")");
    }
}

// Shared pipeline for the network variants: optional frozen AR memory in front of a trained head.
template <typename Net, typename MakeNet, typename Wrap>
FitResult fit_network(const TimeSeries& series, const ModelConfig& config, bool with_memory, MakeNet&& make_net,
                      Wrap&& wrap) {
    const std::size_t p = config.p;
    require_training_length(series, p);
    const auto stats = fit_standardize(series);
    const auto z = standardized_values(series, stats);

    std::optional<ArModel> memory;
    std::vector<double> work = z;
    if (with_memory) {
        memory = fit_ar(z, p, config.memory_d);
        if (memory->d == 1) {
            work = difference(z);
        }
    }
    auto windows = make_windows(work, p);
    if (memory) {
        for (std::size_t m = 0; m < windows.size(); ++m) {
            auto row = windows.row(m);
            apply_memory(memory->coeffs, row, row);
        }
    }
    auto [net, history] = train(Net(make_net()), windows, config.train);
    FitResult result{ForecastModel{wrap(std::move(memory), std::move(net)), stats, p}, std::move(history)};
    result.model.validate();
    return result;
}

}  // namespace

FitResult fit_ar_kan(const TimeSeries& train, const ModelConfig& config) {
    return fit_network<KanNetwork>(
        train, config, true,
        [&] {
            return KanNetwork::random(network_widths(config.p, config.kan_hidden), config.grid,
                                      config.base_activation, config.train.seed);
        },
        [](std::optional<ArModel> memory, KanNetwork net) -> ModelPayload {
            return ArKanModel{std::move(*memory), std::move(net)};
        });
}

FitResult fit_ar_mlp(const TimeSeries& train, const ModelConfig& config) {
    return fit_network<MlpNetwork>(
        train, config, true,
        [&] { return MlpNetwork::random(network_widths(config.p, config.mlp_hidden), config.train.seed); },
        [](std::optional<ArModel> memory, MlpNetwork net) -> ModelPayload {
            return ArMlpModel{std::move(*memory), std::move(net)};
        });
}

FitResult fit_plain(Variant variant, const TimeSeries& train, const ModelConfig& config) {
    if (variant == Variant::Kan) {
        return fit_network<KanNetwork>(
            train, config, false,
            [&] {
                return KanNetwork::random(network_widths(config.p, config.kan_hidden), config.grid,
                                          config.base_activation, config.train.seed);
            },
            [](std::optional<ArModel>, KanNetwork net) -> ModelPayload { return PlainKanModel{std::move(net)}; });
    }
    if (variant == Variant::Mlp) {
        return fit_network<MlpNetwork>(
            train, config, false,
            [&] { return MlpNetwork::random(network_widths(config.p, config.mlp_hidden), config.train.seed); },
            [](std::optional<ArModel>, MlpNetwork net) -> ModelPayload { return PlainMlpModel{std::move(net)}; });
    }
    throw InvalidArgument("fit_plain accepts only kan or mlp");
}

// ---------------------------------------------------------------------------
// ARIMA

namespace {

// Innovations of w under (phi, theta), zero before index p; returns one-step forecasts of w(k),
// k = p .. w.size() (the last entry is the forecast beyond the end).
std::vector<double> arma_one_step(const ArimaModel& model, std::span<const double> w) {
    const std::size_t p = model.p;
    const std::size_t q = model.q;
    std::vector<double> innovations(w.size(), 0.0);
    std::vector<double> forecasts;
    forecasts.reserve(w.size() + 1 - std::min(w.size(), p));
    for (std::size_t k = p; k <= w.size(); ++k) {
        double pred = 0.0;
        for (std::size_t i = 0; i < p; ++i) {
            pred += model.phi[i] * w[k - 1 - i];
        }
        for (std::size_t j = 0; j < q && j + 1 <= k; ++j) {
            pred += model.theta[j] * innovations[k - 1 - j];
        }
        forecasts.push_back(pred);
        if (k < w.size()) {
            innovations[k] = w[k] - pred;
        }
    }
    return forecasts;
}

// The innovation recursion e(n) = w(n) - ... - sum_j theta_j e(n-j) must be stable. Roots of
// 1 + theta_1 B + ... + theta_q B^q inside the unit circle are replaced by their reciprocals, which
// leaves the autocorrelation of the MA part unchanged.
void make_invertible(std::vector<double>& theta) {
    const auto q = static_cast<Eigen::Index>(theta.size());
    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(q, q);
    for (Eigen::Index j = 0; j < q; ++j) {
        companion(0, j) = -theta[static_cast<std::size_t>(j)];
    }
    for (Eigen::Index j = 1; j < q; ++j) {
        companion(j, j - 1) = 1.0;
    }
    // Eigenvalues are the inverse roots lambda_j, with 1 + sum theta_k B^k = prod_j (1 - lambda_j B).
    Eigen::VectorXcd lambda = companion.eigenvalues();
    bool changed = false;
    for (auto& l : lambda) {
        const double modulus = std::abs(l);
        if (std::abs(modulus - 1.0) < 1e-8) {
            throw EstimationError("ARIMA MA part has a unit root", modulus);
        }
        if (modulus > 1.0) {
            l = 1.0 / std::conj(l);
            changed = true;
        }
    }
    if (!changed) {
        return;
    }
    std::vector<std::complex<double>> poly{1.0};
    for (const auto& l : lambda) {
        poly.push_back(0.0);
        for (std::size_t k = poly.size() - 1; k > 0; --k) {
            poly[k] -= l * poly[k - 1];
        }
    }
    for (std::size_t k = 0; k < theta.size(); ++k) {
        theta[k] = poly[k + 1].real();
    }
}

std::vector<double> innovations_tail(const ArimaModel& model, std::span<const double> w) {
    const auto forecasts = arma_one_step(model, w);
    std::vector<double> tail;
    for (std::size_t j = model.q; j > 0; --j) {
        const std::size_t k = w.size() - j;
        tail.push_back(k >= model.p ? w[k] - forecasts[k - model.p] : 0.0);
    }
    return tail;
}

}  // namespace

std::vector<double> arima_one_step(const ArimaModel& model, std::span<const double> z) {
    const auto d = static_cast<std::size_t>(model.d);
    if (z.size() < model.p + d) {
        throw InvalidArgument("ARIMA needs at least " + std::to_string(model.p + d) + " history samples");
    }
    std::vector<double> w(z.begin(), z.end());
    if (d == 1) {
        w = z.size() >= 2 ? difference(z) : std::vector<double>{};
    }
    auto forecasts = arma_one_step(model, w);
    if (d == 1) {
        // forecasts[k - p] predicts w(k) = z(k + 1) - z(k).
        for (std::size_t idx = 0; idx < forecasts.size(); ++idx) {
            forecasts[idx] += z[model.p + idx];
        }
    }
    return forecasts;
}

ArimaModel fit_arima_order(std::span<const double> standardized, std::size_t p, int d, std::size_t q) {
    if (d != 0 && d != 1) {
        throw InvalidArgument("ARIMA differencing degree must be 0 or 1");
    }
    if (p == 0) {
        throw InvalidArgument("ARIMA AR order must be at least 1");
    }
    std::vector<double> w(standardized.begin(), standardized.end());
    if (d == 1) {
        w = difference(w);
    }
    const std::size_t n = w.size();

    std::vector<double> innovations(n, 0.0);
    std::size_t first_row = p;
    if (q > 0) {
        // Innovations from a long AR of order <= p would be exact combinations of the p AR lags below.
        const std::size_t long_order = std::max(std::min<std::size_t>(40, n / 4), p + q);
        if (long_order < 1) {
            throw InvalidArgument("series too short for the preliminary long AR fit");
        }
        const auto long_ar = solve_yule_walker(autocorrelation(w, long_order), long_order);
        for (std::size_t k = long_order; k < n; ++k) {
            double pred = 0.0;
            for (std::size_t i = 0; i < long_order; ++i) {
                pred += long_ar[i] * w[k - 1 - i];
            }
            innovations[k] = w[k] - pred;
        }
        first_row = std::max(p, long_order + q);
    }
    const std::size_t cols = p + q;
    if (n <= first_row || n - first_row < cols) {
        throw InvalidArgument("ARIMA(" + std::to_string(p) + "," + std::to_string(d) + "," + std::to_string(q) +
                              ") regression has fewer rows than coefficients");
    }
    const auto rows = static_cast<Eigen::Index>(n - first_row);
    Eigen::MatrixXd design(rows, static_cast<Eigen::Index>(cols));
    Eigen::VectorXd target(rows);
    for (std::size_t k = first_row; k < n; ++k) {
        const auto r = static_cast<Eigen::Index>(k - first_row);
        for (std::size_t i = 0; i < p; ++i) {
            design(r, static_cast<Eigen::Index>(i)) = w[k - 1 - i];
        }
        for (std::size_t j = 0; j < q; ++j) {
            design(r, static_cast<Eigen::Index>(p + j)) = innovations[k - 1 - j];
        }
        target(r) = w[k];
    }
    const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (qr.rank() < static_cast<Eigen::Index>(cols)) {
        const auto diag = qr.matrixR().diagonal().cwiseAbs();
        const double cond = diag.minCoeff() > 0.0 ? diag.maxCoeff() / diag.minCoeff()
                                                  : std::numeric_limits<double>::infinity();
        throw EstimationError("ARIMA regression design is rank-deficient", cond);
    }
    const Eigen::VectorXd beta = qr.solve(target);
    if (!beta.allFinite()) {
        throw EstimationError("ARIMA regression produced non-finite coefficients");
    }

    ArimaModel model;
    model.p = p;
    model.d = d;
    model.q = q;
    model.phi.assign(beta.data(), beta.data() + p);
    model.theta.assign(beta.data() + p, beta.data() + cols);
    if (q > 0) {
        make_invertible(model.theta);
    }
    model.residual_history = innovations_tail(model, w);
    return model;
}

FitResult fit_arima(const TimeSeries& train, const ModelConfig& config) {
    const std::size_t p = config.p;
    if (config.arima_d.empty() || config.arima_q.empty()) {
        throw InvalidArgument("ARIMA needs at least one d and one q candidate");
    }
    for (std::size_t q : config.arima_q) {
        if (q != 1 && q != 2) throw InvalidArgument("ARIMA q candidates must be 1 or 2");
    }
    require_training_length(train, p);
    const auto stats = fit_standardize(train);
    const auto z = standardized_values(train, stats);
    const std::size_t inner = split_point(z.size(), 0.8);
    const std::span<const double> zs(z);

    struct Candidate {
        double mse;
        int d;
        std::size_t q;
    };
    std::vector<Candidate> ranked;
    std::string last_error;
    for (int d : config.arima_d) {
        for (std::size_t q : config.arima_q) {
            try {
                const auto candidate = fit_arima_order(zs.first(inner), p, d, q);
                const auto forecasts = arima_one_step(candidate, zs.first(z.size() - 1));
                const std::size_t first = p + static_cast<std::size_t>(d);
                double sse = 0.0;
                for (std::size_t n = std::max(inner, first); n < z.size(); ++n) {
                    const double e = forecasts[n - first] - z[n];
                    sse += e * e;
                }
                const double mse = sse / static_cast<double>(z.size() - std::max(inner, first));
                if (std::isfinite(mse)) {
                    ranked.push_back({mse, d, q});
                }
            } catch (const Error& e) {
                last_error = e.what();
            }
        }
    }
    std::stable_sort(ranked.begin(), ranked.end(), [](const Candidate& a, const Candidate& b) { return a.mse < b.mse; });
    // The refit on the whole split can still fail (e.g. a rank-deficient design); fall back down the ranking.
    std::optional<ArimaModel> chosen;
    for (const auto& c : ranked) {
        try {
            chosen = fit_arima_order(z, p, c.d, c.q);
            break;
        } catch (const Error& e) {
            last_error = e.what();
        }
    }
    if (!chosen) {
        throw EstimationError("no ARIMA candidate could be fitted: " + last_error);
    }
    auto model = std::move(*chosen);
    FitResult result{ForecastModel{std::move(model), stats, p}, std::nullopt};
    result.model.validate();
    return result;
}

FitResult fit_model(Variant variant, const TimeSeries& train, const ModelConfig& config) {
    switch (variant) {
        case Variant::ArKan: return fit_ar_kan(train, config);
        case Variant::ArMlp: return fit_ar_mlp(train, config);
        case Variant::Kan:
        case Variant::Mlp: return fit_plain(variant, train, config);
        case Variant::Arima: return fit_arima(train, config);
    }
    throw InvalidArgument("unknown variant");
}

// ---------------------------------------------------------------------------
// Forecasting

namespace {

double network_output(const KanNetwork& net, std::span<const double> input) {
    return kan_forward(net, input).output(0, 0);
}

double network_output(const MlpNetwork& net, std::span<const double> input) {
    return mlp_forward(net, input).output(0, 0);
}

}  // namespace

double forecast_one_step(const ForecastModel& model, std::span<const double> history) {
    const std::size_t need = model.min_history();
    if (history.size() < need) {
        throw InvalidArgument("forecast needs at least " + std::to_string(need) + " history samples, got " +
                              std::to_string(history.size()));
    }
    const auto& stats = model.stats;
    const std::size_t p = model.p;

    if (const auto* arima = std::get_if<ArimaModel>(&model.payload)) {
        std::vector<double> z(history.size());
        for (std::size_t i = 0; i < history.size(); ++i) {
            z[i] = stats.forward(history[i]);
        }
        return stats.inverse(arima_one_step(*arima, z).back());
    }

    const int d = differencing_of(model.payload);
    // Standardized tail z(N-1-i) for i = 0 .. p-1+d, most recent first.
    std::vector<double> recent(p + static_cast<std::size_t>(d));
    for (std::size_t i = 0; i < recent.size(); ++i) {
        recent[i] = stats.forward(history[history.size() - 1 - i]);
    }
    std::vector<double> window(p);
    for (std::size_t i = 0; i < p; ++i) {
        window[i] = d == 1 ? recent[i] - recent[i + 1] : recent[i];
    }
    const double step = std::visit(
        [&](const auto& m) -> double {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, ArKanModel> || std::is_same_v<T, ArMlpModel>) {
                const auto filtered = apply_memory(m.memory.coeffs, window);
                return network_output(m.net, filtered);
            } else if constexpr (std::is_same_v<T, PlainKanModel> || std::is_same_v<T, PlainMlpModel>) {
                return network_output(m.net, window);
            } else {
                return 0.0;
            }
        },
        model.payload);
    return stats.inverse(d == 1 ? recent[0] + step : step);
}

double forecast_one_step(const ForecastModel& model, const TimeSeries& history) {
    return forecast_one_step(model, history.values());
}

std::vector<double> fitted_values(const ForecastModel& model, const TimeSeries& series) {
    const std::size_t first = model.min_history();
    if (series.size() <= first) {
        throw InvalidArgument("series too short for fitted values");
    }
    const auto values = series.values();
    std::vector<double> out;
    out.reserve(series.size() - first);
    for (std::size_t n = first; n < series.size(); ++n) {
        out.push_back(forecast_one_step(model, values.first(n)));
    }
    return out;
}

Evaluation evaluate_predictor(const Predictor& predictor, const StandardizationStats& stats,
                              const TimeSeries& series, double split_ratio, std::size_t min_history) {
    stats.validate();
    const std::size_t cut = split_point(series.size(), split_ratio);
    if (cut < min_history) {
        throw InvalidArgument("training part (" + std::to_string(cut) + " samples) shorter than the " +
                              std::to_string(min_history) + " samples of history the model needs");
    }
    const auto values = series.values();
    Evaluation result;
    result.n_test = series.size() - cut;
    result.predictions.reserve(result.n_test);
    double sse = 0.0;
    for (std::size_t n = cut; n < series.size(); ++n) {
        const double pred = predictor(values.first(n));
        result.predictions.push_back(pred);
        const double e = (pred - values[n]) / stats.std;
        sse += e * e;
    }
    result.test_mse = sse / static_cast<double>(result.n_test);
    return result;
}

Evaluation evaluate(const ForecastModel& model, const TimeSeries& series, double split_ratio) {
    return evaluate_predictor([&](std::span<const double> h) { return forecast_one_step(model, h); }, model.stats,
                              series, split_ratio, model.min_history());
}

}  // namespace arkan
