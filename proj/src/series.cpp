#include "arkan/series.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "arkan/error.hpp"

namespace arkan {

namespace {

std::string_view trim(std::string_view s) {
    const auto not_space = [](char c) { return c != ' ' && c != '\t' && c != '\r' && c != '\n'; };
    const auto first = std::find_if(s.begin(), s.end(), not_space);
    const auto last = std::find_if(s.rbegin(), s.rend(), not_space).base();
    if (first >= last) {
        return {};
    }
    s = std::string_view(&*first, static_cast<std::size_t>(last - first));
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') {
        s = s.substr(1, s.size() - 2);
    }
    return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        fields.push_back(trim(line.substr(start, comma - start)));
        if (comma == std::string_view::npos) {
            break;
        }
        start = comma + 1;
    }
    return fields;
}

double parse_real(std::string_view cell, const std::string& origin, std::size_t line_no) {
    double value = 0.0;
    const char* begin = cell.data();
    const char* end = begin + cell.size();
    if (!cell.empty() && *begin == '+') {
        ++begin;
    }
    const auto [ptr, ec] = std::from_chars(begin, end, value);
    if (cell.empty() || ec != std::errc() || ptr != end || !std::isfinite(value)) {
        throw ParseError(origin + ":" + std::to_string(line_no) + ": non-numeric cell '" +
                         std::string(cell) + "'");
    }
    return value;
}

}  // namespace

TimeSeries::TimeSeries(std::vector<double> values, std::optional<double> t0,
                       std::optional<double> dt, std::string name)
    : values_(std::move(values)), t0_(t0), dt_(dt), name_(std::move(name)) {
    if (values_.empty()) {
        throw InvalidArgument("time series must not be empty");
    }
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!std::isfinite(values_[i])) {
            throw InvalidArgument("time series sample " + std::to_string(i) + " is not finite");
        }
    }
    if (dt_ && !(*dt_ > 0.0 && std::isfinite(*dt_))) {
        throw InvalidArgument("sample spacing dt must be positive");
    }
}

TimeSeries TimeSeries::slice(std::size_t first, std::size_t count) const {
    if (first + count > values_.size()) {
        throw InvalidArgument("slice out of range");
    }
    std::optional<double> t0 = t0_;
    if (t0 && dt_) {
        *t0 += static_cast<double>(first) * *dt_;
    }
    return TimeSeries(std::vector<double>(values_.begin() + static_cast<std::ptrdiff_t>(first),
                                          values_.begin() + static_cast<std::ptrdiff_t>(first + count)),
                      t0, dt_, name_);
}

void StandardizationStats::validate() const {
    if (!std::isfinite(mean) || !std::isfinite(std) || !(std > 0.0)) {
        throw InvalidArgument("standardization stats need finite mean and std > 0");
    }
}

TimeSeries parse_csv(std::string_view text, const std::string& origin) {
    std::size_t pos = 0;
    std::size_t line_no = 0;
    auto next_line = [&](std::string_view& out) {
        while (pos < text.size()) {
            const auto nl = text.find('\n', pos);
            out = text.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
            pos = nl == std::string_view::npos ? text.size() : nl + 1;
            ++line_no;
            if (!trim(out).empty()) {
                return true;
            }
        }
        return false;
    };

    std::string_view line;
    if (!next_line(line)) {
        throw ParseError(origin + ": empty file (no header row)");
    }
    const auto header = split_fields(line);
    std::optional<std::size_t> value_col;
    std::optional<std::size_t> t_col;
    for (std::size_t c = 0; c < header.size(); ++c) {
        if (header[c] == "value") {
            value_col = c;
        } else if (header[c] == "t") {
            t_col = c;
        }
    }
    if (!value_col) {
        throw ParseError(origin + ": missing 'value' column");
    }

    std::vector<double> values;
    std::vector<double> times;
    while (next_line(line)) {
        const auto fields = split_fields(line);
        if (fields.size() != header.size()) {
            throw ParseError(origin + ":" + std::to_string(line_no) + ": expected " +
                             std::to_string(header.size()) + " fields, found " +
                             std::to_string(fields.size()));
        }
        values.push_back(parse_real(fields[*value_col], origin, line_no));
        if (t_col) {
            times.push_back(parse_real(fields[*t_col], origin, line_no));
        }
    }
    if (values.empty()) {
        throw ParseError(origin + ": no data rows");
    }

    std::optional<double> t0;
    std::optional<double> dt;
    if (t_col) {
        t0 = times.front();
        if (times.size() >= 2) {
            const double step = times[1] - times[0];
            bool uniform = step > 0.0;
            for (std::size_t i = 1; uniform && i < times.size(); ++i) {
                uniform = std::abs((times[i] - times[i - 1]) - step) <= 1e-9 * std::abs(step);
            }
            if (uniform) {
                dt = step;
            } else {
                t0.reset();
            }
        }
    }
    return TimeSeries(std::move(values), t0, dt);
}

TimeSeries load_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open data file: " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    auto ts = parse_csv(buffer.str(), path.string());
    return TimeSeries(std::vector<double>(ts.values().begin(), ts.values().end()), ts.t0(), ts.dt(),
                      path.stem().string());
}

std::string format_double(double x) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    return std::string(buf, ptr);
}

void write_csv(const TimeSeries& ts, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw IoError("cannot write file: " + path.string());
    }
    const bool with_time = ts.t0() && ts.dt();
    out << (with_time ? "t,value\n" : "value\n");
    for (std::size_t i = 0; i < ts.size(); ++i) {
        if (with_time) {
            out << format_double(*ts.t0() + static_cast<double>(i) * *ts.dt()) << ',';
        }
        out << format_double(ts[i]) << '\n';
    }
    if (!out) {
        throw IoError("failed writing file: " + path.string());
    }
}

StandardizationStats fit_standardize(const TimeSeries& train) {
    const auto x = train.values();
    if (x.size() < 2) {
        throw InvalidArgument("standardization needs at least 2 samples");
    }
    double mean = 0.0;
    for (double v : x) {
        mean += v;
    }
    mean /= static_cast<double>(x.size());
    double ss = 0.0;
    for (double v : x) {
        ss += (v - mean) * (v - mean);
    }
    const double std = std::sqrt(ss / static_cast<double>(x.size()));
    if (!(std > 1e-12 * std::max(1.0, std::abs(mean)))) {
        throw DegenerateSeries("series is constant (standard deviation 0)");
    }
    return {mean, std};
}

TimeSeries apply_standardize(const TimeSeries& ts, const StandardizationStats& stats,
                             Direction direction) {
    stats.validate();
    std::vector<double> out(ts.size());
    for (std::size_t i = 0; i < ts.size(); ++i) {
        out[i] = direction == Direction::Forward ? stats.forward(ts[i]) : stats.inverse(ts[i]);
    }
    return TimeSeries(std::move(out), ts.t0(), ts.dt(), ts.name());
}

std::size_t split_point(std::size_t n, double ratio) {
    if (!(ratio > 0.0 && ratio < 1.0)) {
        throw InvalidArgument("split ratio must lie in (0, 1)");
    }
    const auto cut = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n)));
    if (cut == 0 || cut >= n) {
        throw InvalidArgument("split of " + std::to_string(n) + " samples at ratio " +
                              format_double(ratio) + " leaves an empty side");
    }
    return cut;
}

std::pair<TimeSeries, TimeSeries> split(const TimeSeries& ts, double ratio) {
    const auto cut = split_point(ts.size(), ratio);
    return {ts.slice(0, cut), ts.slice(cut, ts.size() - cut)};
}

WindowDataset make_windows(std::span<const double> ts, std::size_t lag,
                           std::span<const double> context) {
    if (lag == 0) {
        throw InvalidArgument("lag order must be at least 1");
    }
    const std::size_t ctx = context.size();
    const std::size_t total = ctx + ts.size();
    if (total < lag + 1 || ts.empty()) {
        throw InvalidArgument("series of length " + std::to_string(total) +
                              " too short for lag " + std::to_string(lag));
    }
    const auto at = [&](std::size_t g) { return g < ctx ? context[g] : ts[g - ctx]; };

    WindowDataset data;
    data.lag = lag;
    const std::size_t first_target = std::max(lag, ctx);
    data.targets.reserve(total - first_target);
    data.inputs.reserve((total - first_target) * lag);
    for (std::size_t g = first_target; g < total; ++g) {
        for (std::size_t i = 0; i < lag; ++i) {
            data.inputs.push_back(at(g - 1 - i));
        }
        data.targets.push_back(at(g));
    }
    return data;
}

WindowDataset make_windows(const TimeSeries& ts, std::size_t lag, const TimeSeries* context) {
    return context ? make_windows(ts.values(), lag, context->values())
                   : make_windows(ts.values(), lag);
}

std::vector<double> difference(std::span<const double> x) {
    if (x.size() < 2) {
        throw InvalidArgument("differencing needs at least 2 samples");
    }
    std::vector<double> out(x.size() - 1);
    for (std::size_t i = 1; i < x.size(); ++i) {
        out[i - 1] = x[i] - x[i - 1];
    }
    return out;
}

}  // namespace arkan
