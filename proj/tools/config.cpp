#include "config.hpp"

#include <fstream>
#include <sstream>

#include "arkan/error.hpp"

namespace arkan::cli {

using nlohmann::json;

namespace {

bool is_variant_key(const std::string& key) {
    for (Variant v : kAllVariants) {
        if (key == to_string(v)) {
            return true;
        }
    }
    return false;
}

template <typename T>
T read(const json& value, const std::string& key) {
    try {
        if constexpr (std::is_unsigned_v<T>) {
            if (!value.is_number_unsigned()) {
                throw InvalidArgument("");
            }
        } else if constexpr (std::is_integral_v<T>) {
            if (!value.is_number_integer()) {
                throw InvalidArgument("");
            }
        } else if constexpr (std::is_floating_point_v<T>) {
            if (!value.is_number()) {
                throw InvalidArgument("");
            }
        }
        return value.get<T>();
    } catch (const std::exception&) {
        throw InvalidArgument("config key '" + key + "' has the wrong type");
    }
}

template <typename T>
std::vector<T> read_list(const json& value, const std::string& key) {
    if (!value.is_array()) {
        throw InvalidArgument("config key '" + key + "' must be an array");
    }
    std::vector<T> out;
    for (const auto& item : value) {
        out.push_back(read<T>(item, key));
    }
    return out;
}

void apply_grid(const json& value, SplineGrid& grid) {
    if (!value.is_object()) {
        throw InvalidArgument("config key 'grid' must be an object");
    }
    for (const auto& [key, v] : value.items()) {
        if (key == "lo") {
            grid.lo = read<double>(v, "grid.lo");
        } else if (key == "hi") {
            grid.hi = read<double>(v, "grid.hi");
        } else if (key == "intervals") {
            grid.intervals = read<int>(v, "grid.intervals");
        } else if (key == "degree") {
            grid.degree = read<int>(v, "grid.degree");
        } else {
            throw InvalidArgument("unknown config key 'grid." + key + "'");
        }
    }
}

// Applies the flat keys of `object`; variant sections are skipped when `allow_sections`.
void apply(const json& object, ModelConfig& cfg, bool allow_sections) {
    TrainConfig& t = cfg.train;
    for (const auto& [key, v] : object.items()) {
        if (key == "learning_rate") {
            t.learning_rate = read<double>(v, key);
        } else if (key == "max_epochs") {
            t.max_epochs = read<std::size_t>(v, key);
        } else if (key == "patience") {
            t.patience = read<std::size_t>(v, key);
        } else if (key == "val_fraction") {
            t.val_fraction = read<double>(v, key);
        } else if (key == "seed") {
            t.seed = read<std::uint64_t>(v, key);
        } else if (key == "adam_beta1") {
            t.adam_beta1 = read<double>(v, key);
        } else if (key == "adam_beta2") {
            t.adam_beta2 = read<double>(v, key);
        } else if (key == "adam_eps") {
            t.adam_eps = read<double>(v, key);
        } else if (key == "p") {
            cfg.p = read<std::size_t>(v, key);
        } else if (key == "kan_hidden") {
            cfg.kan_hidden = read_list<std::size_t>(v, key);
        } else if (key == "grid") {
            apply_grid(v, cfg.grid);
        } else if (key == "base_activation") {
            cfg.base_activation = parse_base_activation(read<std::string>(v, key));
        } else if (key == "mlp_hidden") {
            cfg.mlp_hidden = read_list<std::size_t>(v, key);
        } else if (key == "memory_d") {
            cfg.memory_d = read<int>(v, key);
        } else if (key == "arima_d") {
            cfg.arima_d = read_list<int>(v, key);
        } else if (key == "arima_q") {
            cfg.arima_q = read_list<std::size_t>(v, key);
        } else if (allow_sections && is_variant_key(key)) {
            if (!v.is_object()) {
                throw InvalidArgument("config section '" + key + "' must be an object");
            }
        } else {
            throw InvalidArgument("unknown config key '" + key + "'");
        }
    }
}

}  // namespace

RunConfig::RunConfig(json doc) : doc_(std::move(doc)) {
    if (!doc_.is_object()) {
        throw InvalidArgument("config must be a JSON object");
    }
    // Validate every section once, so typos surface even for variants not run.
    for (Variant v : kAllVariants) {
        (void)resolve(v);
    }
}

RunConfig RunConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open config file: " + path.string());
    }
    std::ostringstream buffer;
    buffer << in.rdbuf();
    try {
        return RunConfig(json::parse(buffer.str()));
    } catch (const json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

ModelConfig RunConfig::resolve(Variant variant, std::optional<std::uint64_t> seed) const {
    ModelConfig cfg;
    apply(doc_, cfg, true);
    const auto section = doc_.find(to_string(variant));
    if (section != doc_.end()) {
        apply(*section, cfg, false);
    }
    if (seed) {
        cfg.train.seed = *seed;
    }
    cfg.train.validate();
    cfg.grid.validate();
    return cfg;
}

}  // namespace arkan::cli
