#include "commands.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <numbers>
#include <ostream>

#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "CLI11.hpp"
#include "arkan/analysis.hpp"
#include "arkan/error.hpp"
#include "arkan/model_io.hpp"
#include "bench.hpp"
#include "config.hpp"

namespace arkan::cli {

using nlohmann::json;

namespace {

namespace fs = std::filesystem;

std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write file: " + path.string());
    }
    return out;
}

void require_file(const fs::path& path, const char* what) {
    if (!fs::is_regular_file(path)) {
        throw IoError(std::string(what) + " not found: " + path.string());
    }
}

TimeSeries training_part(const TimeSeries& series, double ratio) {
    return ratio >= 1.0 ? series : split(series, ratio).first;
}

json report_json(const PeriodicityReport& r) {
    return {{"period", r.period},
            {"strength", r.strength},
            {"acf_peak_value", r.acf_peak_value},
            {"weak_peak", r.weak_peak}};
}

// ---------------------------------------------------------------------------

struct SynthArgs {
    std::string function;
    double sigma = 0.0;
    std::uint64_t seed = 0;
    std::size_t samples = 500;
    double tmax = 8.0 * std::numbers::pi;
    std::string out;
};

int run_synth(const SynthArgs& a, std::ostream& out) {
    SynthSpec spec;
    spec.function = parse_synth_function(a.function);
    spec.sigma = a.sigma;
    spec.seed = a.seed;
    spec.n_samples = a.samples;
    spec.t_max = a.tmax;
    const TimeSeries ts = sample(spec);
    write_csv(ts, a.out);
    out << "wrote " << ts.size() << " rows to " << a.out << '\n';
    return kExitOk;
}

struct FitArgs {
    std::string model;
    std::string data;
    std::optional<std::uint64_t> seed;
    std::string out = "model.json";
    std::string config;
    std::string history;
    double train_ratio = 0.8;
};

int run_fit(const FitArgs& a, std::ostream& out) {
    const Variant variant = parse_variant(a.model);
    require_file(a.data, "data file");
    const RunConfig config = a.config.empty() ? RunConfig() : RunConfig::load(a.config);
    const ModelConfig model_config = config.resolve(variant, a.seed);
    const TimeSeries train = training_part(load_csv(a.data), a.train_ratio);
    spdlog::info("fitting {} on {} samples of {}", display_name(variant), train.size(), a.data);

    const auto start = std::chrono::steady_clock::now();
    const FitResult fit = fit_model(variant, train, model_config);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    save_model(fit.model, a.out);

    if (fit.history) {
        out << "validation_loss " << format_double(fit.history->best_val_loss) << " (epoch "
            << fit.history->best_epoch << " of " << fit.history->epochs() << ")\n";
        if (!a.history.empty()) {
            write_history_csv(*fit.history, a.history);
        }
    } else {
        const auto& arima = std::get<ArimaModel>(fit.model.payload);
        out << "selected d=" << arima.d << " q=" << arima.q << '\n';
    }
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", seconds);
    out << "elapsed_seconds " << buf << '\n';
    out << "wrote " << a.out << '\n';
    return kExitOk;
}

struct EvalArgs {
    std::string model;
    std::string data;
    std::string out;
    std::string predictions;
    double split_ratio = 0.8;
};

int run_eval(const EvalArgs& a, std::ostream& out) {
    require_file(a.model, "model file");
    require_file(a.data, "data file");
    const ForecastModel model = load_model(a.model);
    const TimeSeries series = load_csv(a.data);
    const Evaluation ev = evaluate(model, series, a.split_ratio);
    const json report = {{"test_mse", ev.test_mse}, {"n_test", ev.n_test}, {"predictions", ev.predictions}};
    if (a.out.empty()) {
        out << report.dump(1) << '\n';
    } else {
        open_output(a.out) << report.dump(1) << '\n';
        out << "test_mse " << format_double(ev.test_mse) << " over " << ev.n_test << " samples\n";
    }
    if (!a.predictions.empty()) {
        auto csv = open_output(a.predictions);
        const std::size_t first = split_point(series.size(), a.split_ratio);
        csv << "index,t,actual,predicted\n";
        for (std::size_t k = 0; k < ev.predictions.size(); ++k) {
            const std::size_t n = first + k;
            const std::string t =
                series.t0() && series.dt() ? format_double(*series.t0() + static_cast<double>(n) * *series.dt()) : "";
            csv << n << ',' << t << ',' << format_double(series[n]) << ',' << format_double(ev.predictions[k])
                << '\n';
        }
    }
    return kExitOk;
}

struct BenchArgs {
    std::vector<std::string> functions;
    std::vector<std::string> data;
    std::vector<double> sigmas{0.1, 0.2, 0.3, 0.4};
    std::vector<std::string> models{"arima", "ar_kan", "ar_mlp", "kan", "mlp"};
    std::vector<std::string> seeds{"1..5"};
    std::size_t samples = 500;
    double split_ratio = 0.8;
    std::string config;
    std::string out = "bench.csv";
    std::string markdown;
    std::size_t jobs = 1;
    bool no_timings = false;
};

std::vector<std::uint64_t> parse_seeds(const std::vector<std::string>& items) {
    std::vector<std::uint64_t> seeds;
    const auto number = [](const std::string& s) {
        std::size_t used = 0;
        unsigned long long v = 0;
        try {
            v = std::stoull(s, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != s.size() || s.empty() || s.front() == '-') {
            throw InvalidArgument("bad seed '" + s + "'");
        }
        return static_cast<std::uint64_t>(v);
    };
    for (const auto& item : items) {
        const auto dots = item.find("..");
        if (dots == std::string::npos) {
            seeds.push_back(number(item));
            continue;
        }
        const auto lo = number(item.substr(0, dots));
        const auto hi = number(item.substr(dots + 2));
        if (hi < lo || hi - lo > 100000) {
            throw InvalidArgument("bad seed range '" + item + "'");
        }
        for (auto s = lo; s <= hi; ++s) {
            seeds.push_back(s);
        }
    }
    return seeds;
}

int run_bench_command(const BenchArgs& a, std::ostream& out) {
    BenchSpec spec;
    for (const auto& f : a.functions) {
        spec.datasets.push_back({parse_synth_function(f), {}});
    }
    for (const auto& d : a.data) {
        require_file(d, "data file");
        spec.datasets.push_back({std::nullopt, d});
    }
    spec.sigmas = a.sigmas;
    for (const auto& m : a.models) {
        spec.models.push_back(parse_variant(m));
    }
    spec.seeds = parse_seeds(a.seeds);
    spec.samples = a.samples;
    spec.split_ratio = a.split_ratio;
    if (!a.config.empty()) {
        spec.config = RunConfig::load(a.config);
    }
    spec.validate();

    const BenchReport report = run_bench(spec, a.jobs);
    {
        auto csv = open_output(a.out);
        write_bench_csv(report, csv, !a.no_timings);
    }
    const std::string pivot = render_pivot(report, spec.models);
    const fs::path md = a.markdown.empty() ? fs::path(a.out).replace_extension(".md") : fs::path(a.markdown);
    open_output(md) << pivot;
    out << pivot;
    out << "wrote " << report.rows.size() << " rows to " << a.out << " and the table to " << md.string() << '\n';
    if (report.failures() > 0) {
        spdlog::error("{} of {} cells failed", report.failures(), report.rows.size());
        return kExitFailure;
    }
    return kExitOk;
}

struct PeriodicityArgs {
    std::vector<std::string> inputs;
    bool markdown = false;
};

int run_periodicity(const PeriodicityArgs& a, std::ostream& out) {
    if (a.inputs.size() == 1 && !fs::is_directory(a.inputs.front())) {
        require_file(a.inputs.front(), "data file");
        out << report_json(periodicity_strength(load_csv(a.inputs.front()))).dump(1) << '\n';
        return kExitOk;
    }
    std::vector<fs::path> files;
    for (const auto& input : a.inputs) {
        if (fs::is_directory(input)) {
            std::vector<fs::path> found;
            for (const auto& entry : fs::directory_iterator(input)) {
                if (entry.is_regular_file() && entry.path().extension() == ".csv") {
                    found.push_back(entry.path());
                }
            }
            std::sort(found.begin(), found.end());
            files.insert(files.end(), found.begin(), found.end());
        } else {
            files.emplace_back(input);
        }
    }
    struct Entry {
        std::string name;
        std::optional<PeriodicityReport> report;
        std::string error;
    };
    std::vector<Entry> entries;
    for (const auto& f : files) {
        Entry e{f.stem().string(), std::nullopt, {}};
        try {
            e.report = periodicity_strength(load_csv(f));
        } catch (const std::exception& ex) {
            e.error = ex.what();
        }
        entries.push_back(std::move(e));
    }
    std::stable_sort(entries.begin(), entries.end(), [](const Entry& x, const Entry& y) {
        if (x.report.has_value() != y.report.has_value()) {
            return x.report.has_value();
        }
        return x.report && x.report->strength > y.report->strength;
    });
    const bool any_error = std::any_of(entries.begin(), entries.end(), [](const Entry& e) { return !e.report; });
    if (a.markdown) {
        out << "| dataset | strength | period | acf_peak_value | weak_peak |\n|---|---|---|---|---|\n";
        for (const auto& e : entries) {
            if (e.report) {
                char buf[96];
                std::snprintf(buf, sizeof buf, "%.2f%% | %zu | %.4f | %s", 100.0 * e.report->strength,
                              e.report->period, e.report->acf_peak_value, e.report->weak_peak ? "yes" : "no");
                out << "| " << e.name << " | " << buf << " |\n";
            } else {
                out << "| " << e.name << " | error: " << e.error << " | | | |\n";
            }
        }
    } else {
        json rows = json::array();
        for (const auto& e : entries) {
            json row = e.report ? report_json(*e.report) : json{{"error", e.error}};
            row["dataset"] = e.name;
            rows.push_back(std::move(row));
        }
        out << rows.dump(1) << '\n';
    }
    return any_error ? kExitUsage : kExitOk;
}

int exit_code_for(const std::exception& e) {
    if (dynamic_cast<const InvalidArgument*>(&e) != nullptr || dynamic_cast<const IoError*>(&e) != nullptr ||
        dynamic_cast<const ParseError*>(&e) != nullptr || dynamic_cast<const ShapeError*>(&e) != nullptr ||
        dynamic_cast<const DegenerateSeries*>(&e) != nullptr) {
        return kExitUsage;
    }
    return kExitFailure;
}

}  // namespace

void configure_logging() {
    auto logger = spdlog::get("arkan");
    if (!logger) {
        logger = spdlog::stderr_color_mt("arkan");
        spdlog::set_default_logger(logger);
    }
    spdlog::set_pattern("[%l] %v");
    const char* env = std::getenv("ARKAN_LOG");
    const std::string level = env != nullptr ? env : "info";
    if (level == "error") {
        spdlog::set_level(spdlog::level::err);
    } else if (level == "debug") {
        spdlog::set_level(spdlog::level::debug);
    } else {
        spdlog::set_level(spdlog::level::info);
        if (level != "info") {
            spdlog::warn("ARKAN_LOG='{}' not recognised (error|info|debug); using info", level);
        }
    }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"AR-KAN forecasting toolkit", "arkan"};
    app.require_subcommand(1);

    SynthArgs synth;
    auto* synth_cmd = app.add_subcommand("synth", "Sample a noisy almost-periodic benchmark function to CSV");
    synth_cmd->add_option("--function", synth.function, "f1 or f2")->required();
    synth_cmd->add_option("--sigma", synth.sigma, "Noise standard deviation")->check(CLI::NonNegativeNumber);
    synth_cmd->add_option("--seed", synth.seed, "Noise seed");
    synth_cmd->add_option("--samples", synth.samples, "Number of samples")->check(CLI::PositiveNumber);
    synth_cmd->add_option("--tmax", synth.tmax, "Last sample time")->check(CLI::PositiveNumber);
    synth_cmd->add_option("--out", synth.out, "Output CSV")->required();

    FitArgs fit;
    auto* fit_cmd = app.add_subcommand("fit", "Fit a model on the training part of a series");
    fit_cmd->add_option("--model", fit.model, "ar_kan, ar_mlp, kan, mlp or arima")->required();
    fit_cmd->add_option("--data", fit.data, "Data CSV")->required();
    fit_cmd->add_option("--seed", fit.seed, "Training seed (overrides the config)");
    fit_cmd->add_option("--out", fit.out, "Model document to write")->capture_default_str();
    fit_cmd->add_option("--config", fit.config, "JSON run configuration");
    fit_cmd->add_option("--history", fit.history, "Write the per-epoch losses to this CSV");
    fit_cmd->add_option("--train-ratio", fit.train_ratio, "Leading fraction of the series used for fitting")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();

    EvalArgs eval;
    auto* eval_cmd = app.add_subcommand("eval", "One-step forecasts over the test part of a series");
    eval_cmd->add_option("--model", eval.model, "Model document")->required();
    eval_cmd->add_option("--data", eval.data, "Data CSV")->required();
    eval_cmd->add_option("--out", eval.out, "Write the JSON report here instead of stdout");
    eval_cmd->add_option("--predictions", eval.predictions, "Write index,t,actual,predicted CSV");
    eval_cmd->add_option("--split", eval.split_ratio, "Train fraction; the rest is the test part")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();

    BenchArgs bench;
    auto* bench_cmd = app.add_subcommand("bench", "Fit and evaluate a grid of models, datasets and seeds");
    bench_cmd->add_option("--functions", bench.functions, "Synthetic functions (f1,f2)")->delimiter(',');
    bench_cmd->add_option("--data", bench.data, "CSV datasets")->delimiter(',');
    bench_cmd->add_option("--sigmas", bench.sigmas, "Noise levels for synthetic functions")
        ->delimiter(',')
        ->capture_default_str();
    bench_cmd->add_option("--models", bench.models, "Model tags")->delimiter(',')->capture_default_str();
    bench_cmd->add_option("--seeds", bench.seeds, "Seeds, e.g. 1,2,3 or 1..5")->delimiter(',')->capture_default_str();
    bench_cmd->add_option("--samples", bench.samples, "Samples per synthetic series")->check(CLI::PositiveNumber);
    bench_cmd->add_option("--split", bench.split_ratio, "Train fraction")->check(CLI::Range(0.0, 1.0));
    bench_cmd->add_option("--config", bench.config, "JSON run configuration");
    bench_cmd->add_option("--out", bench.out, "Long-form CSV report")->capture_default_str();
    bench_cmd->add_option("--markdown", bench.markdown, "Pivot table (default: --out with .md)");
    bench_cmd->add_option("--jobs", bench.jobs, "Concurrent cells")->check(CLI::PositiveNumber);
    bench_cmd->add_flag("--no-timings", bench.no_timings, "Leave train_seconds empty");

    PeriodicityArgs periodicity;
    auto* periodicity_cmd = app.add_subcommand("periodicity", "Periodicity strength of CSV series");
    periodicity_cmd->add_option("inputs", periodicity.inputs, "CSV files or directories")->required();
    periodicity_cmd->add_flag("--markdown", periodicity.markdown, "Print a markdown table in multi-file mode");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        if (auto* sub = app.get_subcommands().empty() ? nullptr : app.get_subcommands().front()) {
            err << "run 'arkan " << sub->get_name() << " --help' for usage\n";
        } else {
            err << "run 'arkan --help' for usage\n";
        }
        return kExitUsage;
    }

    try {
        if (synth_cmd->parsed()) {
            return run_synth(synth, out);
        }
        if (fit_cmd->parsed()) {
            return run_fit(fit, out);
        }
        if (eval_cmd->parsed()) {
            return run_eval(eval, out);
        }
        if (bench_cmd->parsed()) {
            return run_bench_command(bench, out);
        }
        return run_periodicity(periodicity, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_code_for(e);
    }
}

}  // namespace arkan::cli
