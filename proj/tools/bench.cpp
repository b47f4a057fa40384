#include "bench.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cstdio>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include <spdlog/spdlog.h>

#include "arkan/error.hpp"

namespace arkan::cli {

std::string BenchDataset::name() const {
    return function ? to_string(*function) : path.stem().string();
}

void BenchSpec::validate() const {
    if (datasets.empty() || models.empty() || seeds.empty()) {
        throw InvalidArgument("bench needs at least one dataset, model and seed");
    }
    const bool synthetic =
        std::any_of(datasets.begin(), datasets.end(), [](const BenchDataset& d) { return d.function.has_value(); });
    if (synthetic && sigmas.empty()) {
        throw InvalidArgument("bench needs at least one sigma for synthetic functions");
    }
    for (double s : sigmas) {
        if (!(s >= 0.0) || !std::isfinite(s)) {
            throw InvalidArgument("sigma must be finite and non-negative");
        }
    }
    if (!(split_ratio > 0.0 && split_ratio < 1.0)) {
        throw InvalidArgument("split ratio must lie in (0, 1)");
    }
}

std::size_t BenchReport::failures() const {
    return static_cast<std::size_t>(
        std::count_if(rows.begin(), rows.end(), [](const BenchRow& r) { return !r.test_mse.has_value(); }));
}

namespace {

struct Cell {
    const BenchDataset* dataset;
    const TimeSeries* loaded;  // CSV datasets
    std::optional<double> sigma;
    Variant model;
    std::uint64_t seed;
};

std::string one_line(std::string s) {
    for (char& c : s) {
        if (c == '\n' || c == '\r' || c == ',') {
            c = ' ';
        }
    }
    return s;
}

BenchRow run_cell(const Cell& cell, const BenchSpec& spec) {
    BenchRow row;
    row.dataset = cell.dataset->name();
    row.sigma = cell.sigma;
    row.model = cell.model;
    row.seed = cell.seed;
    try {
        const TimeSeries series = [&] {
            if (cell.loaded != nullptr) {
                return *cell.loaded;
            }
            SynthSpec s;
            s.function = *cell.dataset->function;
            s.sigma = *cell.sigma;
            s.n_samples = spec.samples;
            s.seed = cell.seed;
            return sample(s);
        }();
        const TimeSeries train = split(series, spec.split_ratio).first;
        const ModelConfig config = spec.config.resolve(cell.model, cell.seed);
        const auto start = std::chrono::steady_clock::now();
        const FitResult fit = fit_model(cell.model, train, config);
        row.train_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        row.test_mse = evaluate(fit.model, series, spec.split_ratio).test_mse;
    } catch (const std::exception& e) {
        row.test_mse.reset();
        row.status = "error: " + one_line(e.what());
    }
    return row;
}

}  // namespace

BenchReport run_bench(const BenchSpec& spec, std::size_t jobs) {
    spec.validate();
    std::map<const BenchDataset*, TimeSeries> loaded;
    std::vector<std::pair<const BenchDataset*, std::string>> load_errors;
    for (const auto& d : spec.datasets) {
        if (!d.function) {
            try {
                loaded.emplace(&d, load_csv(d.path));
            } catch (const std::exception& e) {
                load_errors.emplace_back(&d, one_line(e.what()));
            }
        }
    }

    std::vector<Cell> cells;
    for (const auto& d : spec.datasets) {
        std::vector<std::optional<double>> sigmas;
        if (d.function) {
            sigmas.assign(spec.sigmas.begin(), spec.sigmas.end());
        } else {
            sigmas.emplace_back(std::nullopt);
        }
        const auto it = loaded.find(&d);
        for (const auto& sigma : sigmas) {
            for (Variant m : spec.models) {
                for (auto seed : spec.seeds) {
                    cells.push_back({&d, it == loaded.end() ? nullptr : &it->second, sigma, m, seed});
                }
            }
        }
    }

    BenchReport report;
    report.rows.resize(cells.size());
    std::atomic<std::size_t> next{0};
    std::mutex log_mutex;
    std::size_t done = 0;
    const auto worker = [&] {
        for (std::size_t k = next++; k < cells.size(); k = next++) {
            const Cell& cell = cells[k];
            BenchRow row;
            const auto failed = std::find_if(load_errors.begin(), load_errors.end(),
                                             [&](const auto& e) { return e.first == cell.dataset; });
            if (failed != load_errors.end()) {
                row.dataset = cell.dataset->name();
                row.model = cell.model;
                row.seed = cell.seed;
                row.status = "error: " + failed->second;
            } else {
                row = run_cell(cell, spec);
            }
            std::lock_guard lock(log_mutex);
            ++done;
            spdlog::info("[{}/{}] {} sigma={} {} seed={}: {}", done, cells.size(), row.dataset,
                         row.sigma ? format_double(*row.sigma) : "-", display_name(row.model), row.seed,
                         row.test_mse ? format_mse(*row.test_mse) : row.status);
            report.rows[k] = std::move(row);
        }
    };
    const std::size_t threads = std::max<std::size_t>(1, std::min(jobs, cells.size()));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t t = 0; t < threads; ++t) {
            pool.emplace_back(worker);
        }
        for (auto& t : pool) {
            t.join();
        }
    }
    return report;
}

void write_bench_csv(const BenchReport& report, std::ostream& out, bool timings) {
    out << "dataset,sigma,model,seed,test_mse,train_seconds,status\n";
    for (const auto& r : report.rows) {
        out << r.dataset << ',' << (r.sigma ? format_double(*r.sigma) : "") << ',' << to_string(r.model) << ','
            << r.seed << ',' << (r.test_mse ? format_double(*r.test_mse) : "") << ',';
        if (timings) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.3f", r.train_seconds);
            out << buf;
        }
        out << ',' << r.status << '\n';
    }
}

double median(std::vector<double> values) {
    if (values.empty()) {
        throw InvalidArgument("median of an empty list");
    }
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

std::string format_mse(double value) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4g", value);
    return buf;
}

std::string render_pivot(const BenchReport& report, const std::vector<Variant>& models) {
    // Row keys in first-appearance order.
    std::vector<std::pair<std::string, std::optional<double>>> keys;
    for (const auto& r : report.rows) {
        const std::pair key{r.dataset, r.sigma};
        if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
            keys.push_back(key);
        }
    }
    std::ostringstream out;
    out << "| dataset | sigma |";
    for (Variant m : models) {
        out << ' ' << display_name(m) << " |";
    }
    out << "\n|---|---|";
    for (std::size_t i = 0; i < models.size(); ++i) {
        out << "---|";
    }
    out << '\n';
    for (const auto& key : keys) {
        std::vector<std::optional<double>> medians;
        std::vector<std::string> notes;
        for (Variant m : models) {
            std::vector<double> ok;
            std::size_t total = 0;
            for (const auto& r : report.rows) {
                if (r.dataset == key.first && r.sigma == key.second && r.model == m) {
                    ++total;
                    if (r.test_mse) {
                        ok.push_back(*r.test_mse);
                    }
                }
            }
            medians.push_back(ok.empty() ? std::nullopt : std::optional(median(ok)));
            notes.push_back(ok.size() == total ? ""
                                               : " (" + std::to_string(ok.size()) + "/" + std::to_string(total) + ")");
        }
        std::optional<double> best;
        for (const auto& m : medians) {
            if (m && (!best || *m < *best)) {
                best = *m;
            }
        }
        out << "| " << key.first << " | " << (key.second ? format_double(*key.second) : "-") << " |";
        for (std::size_t i = 0; i < models.size(); ++i) {
            if (!medians[i]) {
                out << " ERR" << notes[i] << " |";
                continue;
            }
            const std::string text = format_mse(*medians[i]);
            const bool is_best = *medians[i] == *best;
            out << ' ' << (is_best ? "**" + text + "**" : text) << notes[i] << " |";
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace arkan::cli
