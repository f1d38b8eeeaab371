#include "rabiq/experiment.hpp"

#include "rabiq/errors.hpp"

#include <json.hpp>
#include <openssl/evp.h>
#include <yaml-cpp/yaml.h>

#include <array>
#include <fstream>
#include <sstream>

namespace rabiq {

namespace {

template <class T>
T scalar(const YAML::Node& node, const std::string& key, const char* expected) {
    if (!node.IsScalar()) {
        throw ConfigError("config key '" + key + "': expected " + expected);
    }
    try {
        return node.as<T>();
    } catch (const YAML::Exception&) {
        throw ConfigError("config key '" + key + "': expected " + expected + ", got '" +
                          node.Scalar() + "'");
    }
}

std::size_t count_value(const YAML::Node& node, const std::string& key) {
    const auto v = scalar<long long>(node, key, "a non-negative integer");
    if (v < 0) {
        throw ConfigError("config key '" + key + "' must be non-negative");
    }
    return static_cast<std::size_t>(v);
}

template <class E, std::size_t N>
E choice(const YAML::Node& node, const std::string& key,
         const std::array<std::pair<const char*, E>, N>& options) {
    const auto text = scalar<std::string>(node, key, "a keyword");
    for (const auto& [name, value] : options) {
        if (text == name) {
            return value;
        }
    }
    std::string allowed;
    for (const auto& [name, value] : options) {
        allowed += allowed.empty() ? name : std::string(" | ") + name;
    }
    throw ConfigError("config key '" + key + "': '" + text + "' is not one of " + allowed);
}

constexpr std::array<std::pair<const char*, DisorderChannel>, 2> kChannels{
    {{"time", DisorderChannel::time}, {"parameter", DisorderChannel::parameter}}};
constexpr std::array<std::pair<const char*, AveragingMode>, 2> kAveraging{
    {{"quadrature", AveragingMode::quadrature}, {"monte_carlo", AveragingMode::monte_carlo}}};
constexpr std::array<std::pair<const char*, StepMode>, 2> kStepModes{
    {{"fixed", StepMode::fixed}, {"adaptive", StepMode::adaptive}}};
constexpr std::array<std::pair<const char*, FixedScheme>, 2> kSchemes{
    {{"magnus4", FixedScheme::magnus4}, {"rk4", FixedScheme::rk4}}};
constexpr std::array<std::pair<const char*, bool>, 4> kSwitch{
    {{"on", true}, {"off", false}, {"true", true}, {"false", false}}};

template <class E, std::size_t N>
const char* name_of(E value, const std::array<std::pair<const char*, E>, N>& options) {
    for (const auto& [name, v] : options) {
        if (v == value) {
            return name;
        }
    }
    return "?";
}

void apply(ExperimentConfig& c, const std::string& key, const YAML::Node& v) {
    auto real = [&] { return scalar<double>(v, key, "a number"); };
    auto integer = [&] { return scalar<int>(v, key, "an integer"); };

    if (key == "g_final") {
        c.g_final = real();
    } else if (key == "omega_tau") {
        c.omega_tau = real();
    } else if (key == "omega_tau_min") {
        c.omega_tau_min = real();
    } else if (key == "omega_tau_max") {
        c.omega_tau_max = real();
    } else if (key == "points_per_decade") {
        c.points_per_decade = integer();
    } else if (key == "disorder_channel") {
        c.disorder_channel = choice(v, key, kChannels);
    } else if (key == "sigma") {
        c.sigma = real();
    } else if (key == "averaging") {
        c.averaging = choice(v, key, kAveraging);
    } else if (key == "n_nodes") {
        c.n_nodes = count_value(v, key);
    } else if (key == "n_samples") {
        c.n_samples = count_value(v, key);
    } else if (key == "seed") {
        c.seed = scalar<std::uint64_t>(v, key, "an unsigned 64-bit integer");
    } else if (key == "step_mode") {
        c.integrator.step_mode = choice(v, key, kStepModes);
    } else if (key == "fixed_scheme") {
        c.integrator.fixed_scheme = choice(v, key, kSchemes);
    } else if (key == "omega_dt") {
        c.integrator.omega_dt = real();
    } else if (key == "rel_tol") {
        c.integrator.rel_tol = real();
    } else if (key == "abs_tol") {
        c.integrator.abs_tol = real();
    } else if (key == "constraint_tol") {
        c.integrator.constraint_tol = real();
    } else if (key == "table_id") {
        c.table_id = integer();
    } else if (key == "sigma_list") {
        if (!v.IsSequence()) {
            throw ConfigError("config key 'sigma_list': expected a list of numbers");
        }
        c.sigma_list.clear();
        for (const auto& item : v) {
            c.sigma_list.push_back(scalar<double>(item, key, "a number"));
        }
    } else if (key == "windows") {
        if (!v.IsSequence()) {
            throw ConfigError("config key 'windows': expected a list of [min, max] pairs");
        }
        c.windows.clear();
        for (const auto& item : v) {
            if (!item.IsSequence() || item.size() != 2) {
                throw ConfigError("config key 'windows': each entry must be [min, max]");
            }
            c.windows.push_back({scalar<double>(item[0], key, "a number"),
                                 scalar<double>(item[1], key, "a number")});
        }
    } else if (key == "fit_input") {
        c.fit_input = scalar<std::string>(v, key, "a path");
    } else if (key == "fit_window_min") {
        c.fit_window_min = real();
    } else if (key == "fit_window_max") {
        c.fit_window_max = real();
    } else if (key == "output_dir") {
        c.output_dir = scalar<std::string>(v, key, "a path");
    } else if (key == "cache") {
        c.cache = choice(v, key, kSwitch);
    } else {
        throw ConfigError("unknown config key '" + key + "'");
    }
}

template <class Fn>
void rethrow_as_config_error(Fn&& fn) {
    try {
        fn();
    } catch (const ConfigError&) {
        throw;
    } catch (const InvalidArgument& e) {
        throw ConfigError(e.what());
    }
}

}  // namespace

AveragingScheme ExperimentConfig::scheme() const {
    if (averaging == AveragingMode::monte_carlo) {
        return MonteCarlo{n_samples, seed};
    }
    return Quadrature{n_nodes};
}

TableSpec ExperimentConfig::table_spec() const {
    TableSpec spec = TableSpec::defaults(table_id);
    if (!sigma_list.empty()) {
        spec.sigma_list = sigma_list;
    }
    if (!windows.empty()) {
        spec.windows = windows;
    }
    spec.points_per_decade = points_per_decade;
    spec.scheme = scheme();
    spec.cfg = integrator;
    return spec;
}

void ExperimentConfig::validate() const {
    rethrow_as_config_error([&] {
        if (!(g_final >= 0.0 && g_final <= 1.0)) {
            throw ConfigError("g_final must lie in [0, 1]");
        }
        if (!(omega_tau > 0.0)) {
            throw ConfigError("omega_tau must be positive");
        }
        if (!(omega_tau_min > 0.0 && omega_tau_max > omega_tau_min)) {
            throw ConfigError("need 0 < omega_tau_min < omega_tau_max");
        }
        if (points_per_decade < 1) {
            throw ConfigError("points_per_decade must be positive");
        }
        if (!(fit_window_min > 0.0 && fit_window_max > fit_window_min)) {
            throw ConfigError("need 0 < fit_window_min < fit_window_max");
        }
        if (table_id < 1 || table_id > 3) {
            throw ConfigError("table_id must be 1, 2 or 3");
        }
        model().validate();
        rabiq::validate(scheme());
        integrator.validate();
    });
}

bool operator==(const ExperimentConfig& a, const ExperimentConfig& b) {
    return a.g_final == b.g_final && a.omega_tau == b.omega_tau &&
           a.omega_tau_min == b.omega_tau_min && a.omega_tau_max == b.omega_tau_max &&
           a.points_per_decade == b.points_per_decade && a.disorder_channel == b.disorder_channel &&
           a.sigma == b.sigma && a.averaging == b.averaging && a.n_nodes == b.n_nodes &&
           a.n_samples == b.n_samples && a.seed == b.seed && a.integrator == b.integrator &&
           a.table_id == b.table_id && a.sigma_list == b.sigma_list && a.windows == b.windows &&
           a.fit_input == b.fit_input && a.fit_window_min == b.fit_window_min &&
           a.fit_window_max == b.fit_window_max && a.output_dir == b.output_dir &&
           a.cache == b.cache;
}

ExperimentConfig parse_config(std::string_view text) {
    YAML::Node root;
    try {
        root = YAML::Load(std::string(text));
    } catch (const YAML::Exception& e) {
        throw ConfigError(std::string("config is not valid YAML: ") + e.what());
    }
    ExperimentConfig config;
    if (root.IsNull()) {
        return config;
    }
    if (!root.IsMap()) {
        throw ConfigError("config must be a flat 'key: value' mapping");
    }
    for (const auto& item : root) {
        apply(config, item.first.as<std::string>(), item.second);
    }
    config.validate();
    return config;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config(buf.str());
}

std::string serialize_config(const ExperimentConfig& c) {
    YAML::Emitter out;
    out.SetDoublePrecision(17);
    out << YAML::BeginMap;
    out << YAML::Key << "g_final" << YAML::Value << c.g_final;
    out << YAML::Key << "omega_tau" << YAML::Value << c.omega_tau;
    out << YAML::Key << "omega_tau_min" << YAML::Value << c.omega_tau_min;
    out << YAML::Key << "omega_tau_max" << YAML::Value << c.omega_tau_max;
    out << YAML::Key << "points_per_decade" << YAML::Value << c.points_per_decade;
    out << YAML::Key << "disorder_channel" << YAML::Value << name_of(c.disorder_channel, kChannels);
    out << YAML::Key << "sigma" << YAML::Value << c.sigma;
    out << YAML::Key << "averaging" << YAML::Value << name_of(c.averaging, kAveraging);
    out << YAML::Key << "n_nodes" << YAML::Value << c.n_nodes;
    out << YAML::Key << "n_samples" << YAML::Value << c.n_samples;
    out << YAML::Key << "seed" << YAML::Value << c.seed;
    out << YAML::Key << "step_mode" << YAML::Value << name_of(c.integrator.step_mode, kStepModes);
    out << YAML::Key << "fixed_scheme" << YAML::Value << name_of(c.integrator.fixed_scheme, kSchemes);
    out << YAML::Key << "omega_dt" << YAML::Value << c.integrator.omega_dt;
    out << YAML::Key << "rel_tol" << YAML::Value << c.integrator.rel_tol;
    out << YAML::Key << "abs_tol" << YAML::Value << c.integrator.abs_tol;
    out << YAML::Key << "constraint_tol" << YAML::Value << c.integrator.constraint_tol;
    out << YAML::Key << "table_id" << YAML::Value << c.table_id;
    if (!c.sigma_list.empty()) {
        out << YAML::Key << "sigma_list" << YAML::Value << YAML::Flow << c.sigma_list;
    }
    if (!c.windows.empty()) {
        out << YAML::Key << "windows" << YAML::Value << YAML::BeginSeq;
        for (const auto& w : c.windows) {
            out << YAML::Flow << YAML::BeginSeq << w.min << w.max << YAML::EndSeq;
        }
        out << YAML::EndSeq;
    }
    if (!c.fit_input.empty()) {
        out << YAML::Key << "fit_input" << YAML::Value << YAML::DoubleQuoted << c.fit_input;
    }
    out << YAML::Key << "fit_window_min" << YAML::Value << c.fit_window_min;
    out << YAML::Key << "fit_window_max" << YAML::Value << c.fit_window_max;
    out << YAML::Key << "output_dir" << YAML::Value << YAML::DoubleQuoted << c.output_dir;
    out << YAML::Key << "cache" << YAML::Value << (c.cache ? "on" : "off");
    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

std::string canonical_physics(const ExperimentConfig& c) {
    nlohmann::json windows = nlohmann::json::array();
    for (const auto& w : c.windows) {
        windows.push_back({w.min, w.max});
    }
    const nlohmann::json j = {
        {"g_final", c.g_final},
        {"omega_tau", c.omega_tau},
        {"omega_tau_min", c.omega_tau_min},
        {"omega_tau_max", c.omega_tau_max},
        {"points_per_decade", c.points_per_decade},
        {"disorder_channel", name_of(c.disorder_channel, kChannels)},
        {"sigma", c.sigma},
        {"averaging", name_of(c.averaging, kAveraging)},
        {"n_nodes", c.n_nodes},
        {"n_samples", c.n_samples},
        {"seed", c.seed},
        {"step_mode", name_of(c.integrator.step_mode, kStepModes)},
        {"fixed_scheme", name_of(c.integrator.fixed_scheme, kSchemes)},
        {"omega_dt", c.integrator.omega_dt},
        {"rel_tol", c.integrator.rel_tol},
        {"abs_tol", c.integrator.abs_tol},
        {"constraint_tol", c.integrator.constraint_tol},
        {"table_id", c.table_id},
        {"sigma_list", c.sigma_list},
        {"windows", windows},
        {"fit_window_min", c.fit_window_min},
        {"fit_window_max", c.fit_window_max},
    };
    return j.dump();
}

std::string cache_key(const ExperimentConfig& config) {
    const std::string payload = canonical_physics(config);
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned int len = 0;
    if (EVP_Digest(payload.data(), payload.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
        throw Error("SHA-256 digest failed");
    }
    static constexpr char kHex[] = "0123456789abcdef";
    std::string hex;
    hex.reserve(2 * len);
    for (unsigned int i = 0; i < len; ++i) {
        hex.push_back(kHex[md[i] >> 4]);
        hex.push_back(kHex[md[i] & 0xF]);
    }
    return hex;
}

}  // namespace rabiq
