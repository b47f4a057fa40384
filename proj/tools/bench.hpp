#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "arkan/models.hpp"
#include "arkan/synth.hpp"
#include "config.hpp"

namespace arkan::cli {

/// A synthetic function (crossed with every sigma) or a CSV file.
struct BenchDataset {
    std::optional<SynthFunction> function;
    std::filesystem::path path;

    [[nodiscard]] std::string name() const;
};

struct BenchSpec {
    std::vector<BenchDataset> datasets;
    std::vector<double> sigmas;
    std::vector<Variant> models;
    std::vector<std::uint64_t> seeds;
    std::size_t samples = 500;
    double split_ratio = 0.8;
    RunConfig config;

    void validate() const;
};

struct BenchRow {
    std::string dataset;
    std::optional<double> sigma;  // synthetic datasets only
    Variant model = Variant::ArKan;
    std::uint64_t seed = 0;
    std::optional<double> test_mse;  // absent when the cell failed
    double train_seconds = 0.0;
    std::string status = "ok";
};

struct BenchReport {
    std::vector<BenchRow> rows;

    [[nodiscard]] std::size_t failures() const;
};

/// Runs every (dataset, sigma, model, seed) cell on up to `jobs` threads.
/// Rows come back in grid order whatever the scheduling; a failing cell yields
/// a row whose status carries the error.
[[nodiscard]] BenchReport run_bench(const BenchSpec& spec, std::size_t jobs = 1);

/// Long-form CSV: dataset,sigma,model,seed,test_mse,train_seconds,status.
/// With `timings` false the train_seconds column is left empty.
void write_bench_csv(const BenchReport& report, std::ostream& out, bool timings = true);

/// Median of a non-empty list.
[[nodiscard]] double median(std::vector<double> values);

/// Markdown table with one row per (dataset, sigma), one column per model and
/// the median test MSE over seeds in each cell; the row minimum is bold.
/// Cells without any successful seed read "ERR"; partial cells note how many
/// seeds succeeded.
[[nodiscard]] std::string render_pivot(const BenchReport& report, const std::vector<Variant>& models);

/// Four significant digits, as used in the pivot.
[[nodiscard]] std::string format_mse(double value);

}  // namespace arkan::cli
