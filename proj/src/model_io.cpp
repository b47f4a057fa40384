#include "arkan/model_io.hpp"

#include <fstream>
#include <sstream>

#include "arkan/error.hpp"

namespace arkan {

using nlohmann::json;

namespace {

json kan_to_json(const KanNetwork& net) {
    json edges = json::array();
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
        for (std::size_t i = 0; i < net.widths()[l]; ++i) {
            for (std::size_t j = 0; j < net.widths()[l + 1]; ++j) {
                const auto e = net.edge(l, i, j);
                for (double c : e.spline_coeffs) {
                    edges.push_back(c);
                }
                edges.push_back(e.base_weight);
                edges.push_back(e.mix_weight);
            }
        }
    }
    const auto& g = net.grid();
    return {{"widths", net.widths()},
            {"grid", {{"lo", g.lo}, {"hi", g.hi}, {"intervals", g.intervals}, {"degree", g.degree}}},
            {"base_activation", to_string(net.base_activation())},
            {"edges", std::move(edges)}};
}

KanNetwork kan_from_json(const json& doc) {
    SplineGrid grid;
    const auto& g = doc.at("grid");
    grid.lo = g.at("lo").get<double>();
    grid.hi = g.at("hi").get<double>();
    grid.intervals = g.at("intervals").get<int>();
    grid.degree = g.at("degree").get<int>();
    KanNetwork net(doc.at("widths").get<std::vector<std::size_t>>(), grid,
                   parse_base_activation(doc.at("base_activation").get<std::string>()));
    const auto edges = doc.at("edges").get<std::vector<double>>();
    const std::size_t nb = grid.num_basis();
    if (edges.size() != net.num_parameters()) {
        throw ParseError("KAN edge list has " + std::to_string(edges.size()) + " values, expected " +
                         std::to_string(net.num_parameters()));
    }
    std::size_t k = 0;
    for (std::size_t l = 0; l < net.num_layers(); ++l) {
        for (std::size_t i = 0; i < net.widths()[l]; ++i) {
            for (std::size_t j = 0; j < net.widths()[l + 1]; ++j) {
                KanEdge e;
                e.spline_coeffs.assign(edges.begin() + static_cast<std::ptrdiff_t>(k),
                                       edges.begin() + static_cast<std::ptrdiff_t>(k + nb));
                e.base_weight = edges[k + nb];
                e.mix_weight = edges[k + nb + 1];
                k += nb + 2;
                net.set_edge(l, i, j, e);
            }
        }
    }
    return net;
}

json mlp_to_json(const MlpNetwork& net) {
    return {{"widths", net.widths()},
            {"activation", "relu"},
            {"parameters", std::vector<double>(net.parameters().begin(), net.parameters().end())}};
}

MlpNetwork mlp_from_json(const json& doc) {
    if (doc.at("activation").get<std::string>() != "relu") {
        throw ParseError("unsupported MLP activation");
    }
    MlpNetwork net(doc.at("widths").get<std::vector<std::size_t>>());
    const auto params = doc.at("parameters").get<std::vector<double>>();
    if (params.size() != net.num_parameters()) {
        throw ParseError("MLP parameter list has " + std::to_string(params.size()) + " values, expected " +
                         std::to_string(net.num_parameters()));
    }
    std::copy(params.begin(), params.end(), net.parameters().begin());
    return net;
}

json memory_to_json(const ArModel& m) {
    return {{"p", m.order()}, {"d", m.d}, {"coeffs", m.coeffs}};
}

ArModel memory_from_json(const json& doc) {
    ArModel m{doc.at("coeffs").get<std::vector<double>>(), doc.at("d").get<int>()};
    if (doc.at("p").get<std::size_t>() != m.order()) {
        throw ParseError("AR memory order does not match its coefficient count");
    }
    return m;
}

json arima_to_json(const ArimaModel& m) {
    return {{"p", m.p},         {"d", m.d},         {"q", m.q},
            {"phi", m.phi},     {"theta", m.theta}, {"residual_history", m.residual_history}};
}

ArimaModel arima_from_json(const json& doc) {
    ArimaModel m;
    m.p = doc.at("p").get<std::size_t>();
    m.d = doc.at("d").get<int>();
    m.q = doc.at("q").get<std::size_t>();
    m.phi = doc.at("phi").get<std::vector<double>>();
    m.theta = doc.at("theta").get<std::vector<double>>();
    m.residual_history = doc.value("residual_history", std::vector<double>{});
    return m;
}

}  // namespace

json model_to_json(const ForecastModel& model) {
    json doc = {{"format_version", kModelFormatVersion},
                {"variant", to_string(model.variant())},
                {"p", model.p},
                {"stats", {{"mean", model.stats.mean}, {"std", model.stats.std}}}};
    std::visit(
        [&doc](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, ArKanModel>) {
                doc["memory"] = memory_to_json(m.memory);
                doc["kan"] = kan_to_json(m.net);
            } else if constexpr (std::is_same_v<T, ArMlpModel>) {
                doc["memory"] = memory_to_json(m.memory);
                doc["mlp"] = mlp_to_json(m.net);
            } else if constexpr (std::is_same_v<T, PlainKanModel>) {
                doc["kan"] = kan_to_json(m.net);
            } else if constexpr (std::is_same_v<T, PlainMlpModel>) {
                doc["mlp"] = mlp_to_json(m.net);
            } else {
                doc["arima"] = arima_to_json(m);
            }
        },
        model.payload);
    return doc;
}

ForecastModel model_from_json(const json& doc) {
    try {
        if (!doc.is_object()) {
            throw ParseError("model document must be a JSON object");
        }
        const int version = doc.at("format_version").get<int>();
        if (version != kModelFormatVersion) {
            throw ParseError("unsupported model format_version " + std::to_string(version));
        }
        const Variant variant = parse_variant(doc.at("variant").get<std::string>());
        StandardizationStats stats{doc.at("stats").at("mean").get<double>(), doc.at("stats").at("std").get<double>()};
        const auto p = doc.at("p").get<std::size_t>();
        ModelPayload payload = [&]() -> ModelPayload {
            switch (variant) {
                case Variant::ArKan:
                    return ArKanModel{memory_from_json(doc.at("memory")), kan_from_json(doc.at("kan"))};
                case Variant::ArMlp:
                    return ArMlpModel{memory_from_json(doc.at("memory")), mlp_from_json(doc.at("mlp"))};
                case Variant::Kan: return PlainKanModel{kan_from_json(doc.at("kan"))};
                case Variant::Mlp: return PlainMlpModel{mlp_from_json(doc.at("mlp"))};
                case Variant::Arima: return arima_from_json(doc.at("arima"));
            }
            throw ParseError("unknown variant");
        }();
        ForecastModel model{std::move(payload), stats, p};
        model.validate();
        return model;
    } catch (const ParseError&) {
        throw;
    } catch (const json::exception& e) {
        throw ParseError(std::string("malformed model document: ") + e.what());
    } catch (const Error& e) {
        throw ParseError(std::string("invalid model document: ") + e.what());
    }
}

void save_model(const ForecastModel& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write model file: " + path.string());
    }
    out << model_to_json(model).dump(1) << '\n';
    if (!out) {
        throw IoError("failed writing model file: " + path.string());
    }
}

ForecastModel load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open model file: " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    json doc;
    try {
        doc = json::parse(buffer.str());
    } catch (const json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    return model_from_json(doc);
}

}  // namespace arkan
