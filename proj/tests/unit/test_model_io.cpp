#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>

#include "arkan/error.hpp"
#include "arkan/model_io.hpp"
#include "arkan/synth.hpp"

using namespace arkan;
using nlohmann::json;

namespace {

std::vector<ForecastModel> sample_models() {
    const StandardizationStats stats{0.25, 1.5};
    SplineGrid grid;
    grid.lo = -2.0;
    grid.hi = 2.5;
    grid.intervals = 4;
    grid.degree = 2;
    const ArModel memory{{0.3, -0.1, 0.05, 0.2}, 0};
    ArimaModel arima;
    arima.p = 4;
    arima.d = 1;
    arima.q = 2;
    arima.phi = {0.1, 0.2, -0.3, 0.05};
    arima.theta = {0.4, -0.2};
    arima.residual_history = {0.01, -0.02};
    return {
        ForecastModel{ArKanModel{memory, KanNetwork::random({4, 3, 1}, grid, BaseActivation::Silu, 1)}, stats, 4},
        ForecastModel{ArMlpModel{ArModel{memory.coeffs, 1}, MlpNetwork::random({4, 5, 1}, 2)}, stats, 4},
        ForecastModel{PlainKanModel{KanNetwork::random({4, 2, 1}, grid, BaseActivation::None, 3)}, stats, 4},
        ForecastModel{PlainMlpModel{MlpNetwork::random({4, 3, 2, 1}, 4)}, stats, 4},
        ForecastModel{arima, stats, 4},
    };
}

std::filesystem::path temp_file(const std::string& name) {
    return std::filesystem::temp_directory_path() / ("arkan_io_" + name);
}

}  // namespace

TEST(ModelIo, RoundTripPreservesForecasts) {
    SynthSpec spec;
    spec.sigma = 0.2;
    spec.n_samples = 60;
    const auto series = sample(spec);
    for (const auto& model : sample_models()) {
        const auto doc = model_to_json(model);
        EXPECT_EQ(doc.at("format_version"), 1);
        EXPECT_EQ(doc.at("variant"), to_string(model.variant()));
        const auto back = model_from_json(json::parse(doc.dump()));
        EXPECT_EQ(back.variant(), model.variant());
        EXPECT_EQ(model_to_json(back), doc);
        EXPECT_EQ(fitted_values(back, series), fitted_values(model, series)) << to_string(model.variant());
    }
}

TEST(ModelIo, FileRoundTrip) {
    const auto path = temp_file("model.json");
    for (const auto& model : sample_models()) {
        save_model(model, path);
        const auto back = load_model(path);
        EXPECT_EQ(model_to_json(back), model_to_json(model));
    }
    std::filesystem::remove(path);
}

TEST(ModelIo, DocumentLayout) {
    const auto models = sample_models();
    const auto kan = model_to_json(models[0]);
    EXPECT_EQ(kan.at("p"), 4);
    EXPECT_EQ(kan.at("memory").at("coeffs").size(), 4u);
    EXPECT_EQ(kan.at("kan").at("base_activation"), "silu");
    EXPECT_EQ(kan.at("kan").at("grid").at("intervals"), 4);
    const auto& net = std::get<ArKanModel>(models[0].payload).net;
    EXPECT_EQ(kan.at("kan").at("edges").size(), net.num_parameters());
    // First edge: G + k coefficients, then base and mix weights.
    const auto e = net.edge(0, 0, 0);
    EXPECT_EQ(kan.at("kan").at("edges")[0].get<double>(), e.spline_coeffs[0]);
    EXPECT_EQ(kan.at("kan").at("edges")[6].get<double>(), e.base_weight);
    EXPECT_EQ(kan.at("kan").at("edges")[7].get<double>(), e.mix_weight);
    const auto mlp = model_to_json(models[3]);
    EXPECT_EQ(mlp.at("mlp").at("activation"), "relu");
    EXPECT_FALSE(mlp.contains("memory"));
    const auto arima = model_to_json(models[4]);
    EXPECT_EQ(arima.at("arima").at("theta").size(), 2u);
}

TEST(ModelIo, CorruptedDocuments) {
    const auto good = model_to_json(sample_models()[0]);
    auto bad = good;
    bad["format_version"] = 2;
    EXPECT_THROW((void)model_from_json(bad), ParseError);
    bad = good;
    bad.erase("stats");
    EXPECT_THROW((void)model_from_json(bad), ParseError);
    bad = good;
    bad["variant"] = "lstm";
    EXPECT_THROW((void)model_from_json(bad), ParseError);
    bad = good;
    bad["kan"]["edges"].erase(0);
    EXPECT_THROW((void)model_from_json(bad), ParseError);
    bad = good;
    bad["memory"]["coeffs"].push_back(0.1);
    EXPECT_THROW((void)model_from_json(bad), ParseError);
    bad = good;
    bad["p"] = 5;
    EXPECT_THROW((void)model_from_json(bad), ParseError);
    bad = good;
    bad["stats"]["std"] = 0.0;
    EXPECT_THROW((void)model_from_json(bad), ParseError);
    bad = good;
    bad["kan"]["grid"]["degree"] = "three";
    EXPECT_THROW((void)model_from_json(bad), ParseError);
    EXPECT_THROW((void)model_from_json(json::array()), ParseError);

    auto mlp = model_to_json(sample_models()[3]);
    mlp["mlp"]["activation"] = "tanh";
    EXPECT_THROW((void)model_from_json(mlp), ParseError);
    auto arima = model_to_json(sample_models()[4]);
    arima["arima"]["q"] = 3;
    EXPECT_THROW((void)model_from_json(arima), ParseError);
}

TEST(ModelIo, FileErrors) {
    EXPECT_THROW((void)load_model(temp_file("does_not_exist.json")), IoError);
    const auto path = temp_file("garbage.json");
    {
        std::ofstream out(path);
        out << "{ not json";
    }
    EXPECT_THROW((void)load_model(path), ParseError);
    std::filesystem::remove(path);
    EXPECT_THROW(save_model(sample_models()[0], temp_file("no_such_dir/model.json")), IoError);
}
