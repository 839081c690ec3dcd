#pragma once

// Run configuration: a small key-value file format (a TOML subset) plus the
// RunConfig struct the CLI operates on.
//
// File grammar, one assignment per line:
//     key = value            value: string "...", integer, float, bool,
//     key = { k = v, ... }          or a one-level inline table
// with '#' comments. Example:
//     model = { family = "power", sigma = 2.0, drift_exp = 2, diff_exp = 1 }
//     scheme = "sd"
//     delta = 0.01

#include <cctype>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "sdexp/errors.hpp"
#include "sdexp/io.hpp"
#include "sdexp/model.hpp"
#include "sdexp/montecarlo.hpp"
#include "sdexp/schemes.hpp"

namespace sdexp {

namespace config {

using Scalar = std::variant<bool, std::int64_t, double, std::string>;

struct ConfigTable {
    std::map<std::string, Scalar> scalars;
    std::map<std::string, std::map<std::string, Scalar>> tables;
};

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

inline Scalar parse_scalar(const std::string& raw, int line_no) {
    const std::string text = trim(raw);
    if (text.empty())
        throw ConfigError("line " + std::to_string(line_no) + ": empty value");
    if (text.front() == '"') {
        if (text.size() < 2 || text.back() != '"')
            throw ConfigError("line " + std::to_string(line_no) + ": unterminated string");
        return text.substr(1, text.size() - 2);
    }
    if (text == "true") return true;
    if (text == "false") return false;
    const bool looks_float = text.find_first_of(".eE") != std::string::npos;
    try {
        std::size_t used = 0;
        if (!looks_float) {
            const std::int64_t v = std::stoll(text, &used);
            if (used == text.size())
                return v;
        }
        const double v = std::stod(text, &used);
        if (used == text.size())
            return v;
    } catch (const std::exception&) {
    }
    throw ConfigError("line " + std::to_string(line_no) + ": bad value '" + text + "'");
}

// Split an inline-table body on commas that sit outside quoted strings.
inline std::vector<std::string> split_items(const std::string& body, int line_no) {
    std::vector<std::string> items;
    std::string current;
    bool in_string = false;
    for (char c : body) {
        if (c == '"')
            in_string = !in_string;
        if (c == ',' && !in_string) {
            items.push_back(current);
            current.clear();
        } else {
            current += c;
        }
    }
    if (in_string)
        throw ConfigError("line " + std::to_string(line_no) + ": unterminated string");
    if (!trim(current).empty() || !items.empty())
        items.push_back(current);
    return items;
}

inline std::pair<std::string, std::string> split_assignment(const std::string& item, int line_no) {
    bool in_string = false;
    for (std::size_t i = 0; i < item.size(); ++i) {
        if (item[i] == '"')
            in_string = !in_string;
        else if (item[i] == '=' && !in_string)
            return {trim(item.substr(0, i)), trim(item.substr(i + 1))};
    }
    throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value'");
}

} // namespace detail

inline ConfigTable parse(const std::string& text) {
    ConfigTable table;
    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        // Strip comments outside strings.
        bool in_string = false;
        for (std::size_t i = 0; i < line.size(); ++i) {
            if (line[i] == '"')
                in_string = !in_string;
            else if (line[i] == '#' && !in_string) {
                line = line.substr(0, i);
                break;
            }
        }
        const std::string stripped = detail::trim(line);
        if (stripped.empty())
            continue;
        auto [key, value] = detail::split_assignment(stripped, line_no);
        if (key.empty())
            throw ConfigError("line " + std::to_string(line_no) + ": missing key");
        if (!value.empty() && value.front() == '{') {
            if (value.back() != '}')
                throw ConfigError("line " + std::to_string(line_no) + ": unterminated table");
            std::map<std::string, Scalar> inner;
            const std::string body = value.substr(1, value.size() - 2);
            for (const std::string& item : detail::split_items(body, line_no)) {
                if (detail::trim(item).empty())
                    throw ConfigError("line " + std::to_string(line_no) + ": empty table entry");
                auto [k, v] = detail::split_assignment(item, line_no);
                inner[k] = detail::parse_scalar(v, line_no);
            }
            table.tables[key] = std::move(inner);
        } else {
            table.scalars[key] = detail::parse_scalar(value, line_no);
        }
    }
    return table;
}

inline ConfigTable parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse(buf.str());
}

} // namespace config

struct ModelSpec {
    std::string family = "power"; // "power" or "expression"
    double sigma = 2.0;
    double drift_exp = 2.0;
    double diff_exp = 1.0;
    std::string a_text;
    std::string b_text;

    friend bool operator==(const ModelSpec&, const ModelSpec&) = default;

    SdeModel build() const {
        if (family == "power")
            return make_power_model(sigma, drift_exp, diff_exp);
        if (family == "expression")
            return make_expression_model(a_text, b_text);
        throw ConfigError("model.family must be \"power\" or \"expression\"");
    }

    void validate() const {
        if (family == "power") {
            if (!(sigma >= 0))
                throw ConfigError("model.sigma must be >= 0");
            if (!(drift_exp > 0))
                throw ConfigError("model.drift_exp must be > 0");
            if (!(diff_exp > 0))
                throw ConfigError("model.diff_exp must be > 0");
        } else if (family == "expression") {
            if (a_text.empty())
                throw ConfigError("model.a is required for an expression model");
            if (b_text.empty())
                throw ConfigError("model.b is required for an expression model");
            try {
                Expression::parse(a_text);
            } catch (const ExpressionError& e) {
                throw ConfigError(std::string("model.a: ") + e.what());
            }
            try {
                Expression::parse(b_text);
            } catch (const ExpressionError& e) {
                throw ConfigError(std::string("model.b: ") + e.what());
            }
        } else {
            throw ConfigError("model.family must be \"power\" or \"expression\"");
        }
    }
};

struct RunConfig {
    ModelSpec model{};
    SchemeKind scheme = SchemeKind::SemiDiscrete;
    double delta = 0.01;
    std::uint64_t steps = 10000;
    double y0 = 1.0;
    std::uint64_t seed = 0;
    std::uint64_t path_index = 0;
    std::uint64_t paths = 1000;
    unsigned workers = 0;
    double eps_zero = 1e-6;
    std::optional<double> moment_p{};
    GuardConfig guards{};
    std::string out;
    std::string dump_dir;

    friend bool operator==(const RunConfig&, const RunConfig&) = default;

    void validate() const {
        model.validate();
        if (!(delta > 0))
            throw ConfigError("delta must be > 0");
        if (steps < 1)
            throw ConfigError("steps must be >= 1");
        if (y0 < 0)
            throw ConfigError("y0 must be >= 0");
        if (paths < 1)
            throw ConfigError("paths must be >= 1");
        if (!(guards.explosion_threshold > guards.absorption_floor))
            throw ConfigError("guards.explosion_threshold must exceed guards.absorption_floor");
        if (guards.record_every == 0)
            throw ConfigError("guards.record_every must be >= 1");
        if (!(eps_zero > guards.absorption_floor))
            throw ConfigError("eps_zero must exceed guards.absorption_floor");
        if (moment_p && !(*moment_p > 0 && *moment_p < 1))
            throw ConfigError("moment_p must lie in (0,1)");
    }

    EnsembleConfig to_ensemble() const {
        validate();
        EnsembleConfig cfg{model.build()};
        cfg.scheme = scheme;
        cfg.y0 = y0;
        cfg.delta = delta;
        cfg.n_steps = steps;
        cfg.n_paths = paths;
        cfg.master_seed = seed;
        cfg.guards = guards;
        cfg.eps_zero = eps_zero;
        cfg.moment_p = moment_p;
        cfg.workers = workers;
        return cfg;
    }

    static RunConfig from_table(const config::ConfigTable& table);
    static RunConfig from_string(const std::string& text) {
        return from_table(config::parse(text));
    }
    static RunConfig from_file(const std::string& path) {
        return from_table(config::parse_file(path));
    }
    std::string to_config_string() const;
};

namespace config::detail {

inline double as_double(const Scalar& s, const std::string& field) {
    if (const auto* d = std::get_if<double>(&s))
        return *d;
    if (const auto* i = std::get_if<std::int64_t>(&s))
        return static_cast<double>(*i);
    throw ConfigError(field + " must be a number");
}

inline std::uint64_t as_uint(const Scalar& s, const std::string& field) {
    if (const auto* i = std::get_if<std::int64_t>(&s)) {
        if (*i < 0)
            throw ConfigError(field + " must be nonnegative");
        return static_cast<std::uint64_t>(*i);
    }
    throw ConfigError(field + " must be a nonnegative integer");
}

inline std::string as_string(const Scalar& s, const std::string& field) {
    if (const auto* str = std::get_if<std::string>(&s))
        return *str;
    throw ConfigError(field + " must be a string");
}

} // namespace config::detail

inline SchemeKind scheme_from_string(const std::string& name) {
    if (name == "sd") return SchemeKind::SemiDiscrete;
    if (name == "em") return SchemeKind::EulerMaruyama;
    if (name == "tamed") return SchemeKind::TamedEuler;
    throw ConfigError("scheme must be one of \"sd\", \"em\", \"tamed\"");
}

inline RunConfig RunConfig::from_table(const config::ConfigTable& table) {
    using config::detail::as_double;
    using config::detail::as_string;
    using config::detail::as_uint;

    RunConfig cfg;
    for (const auto& [key, value] : table.scalars) {
        if (key == "scheme") cfg.scheme = scheme_from_string(as_string(value, key));
        else if (key == "delta") cfg.delta = as_double(value, key);
        else if (key == "steps") cfg.steps = as_uint(value, key);
        else if (key == "y0") cfg.y0 = as_double(value, key);
        else if (key == "seed") cfg.seed = as_uint(value, key);
        else if (key == "path") cfg.path_index = as_uint(value, key);
        else if (key == "paths") cfg.paths = as_uint(value, key);
        else if (key == "workers") cfg.workers = static_cast<unsigned>(as_uint(value, key));
        else if (key == "eps_zero") cfg.eps_zero = as_double(value, key);
        else if (key == "moment_p") cfg.moment_p = as_double(value, key);
        else if (key == "out") cfg.out = as_string(value, key);
        else if (key == "dump_paths") cfg.dump_dir = as_string(value, key);
        else throw ConfigError("unknown config key '" + key + "'");
    }
    for (const auto& [key, inner] : table.tables) {
        if (key == "model") {
            bool has_expr = inner.count("a") || inner.count("b");
            if (inner.count("family"))
                cfg.model.family = as_string(inner.at("family"), "model.family");
            else
                cfg.model.family = has_expr ? "expression" : "power";
            for (const auto& [k, v] : inner) {
                if (k == "family") continue;
                else if (k == "sigma") cfg.model.sigma = as_double(v, "model.sigma");
                else if (k == "drift_exp") cfg.model.drift_exp = as_double(v, "model.drift_exp");
                else if (k == "diff_exp") cfg.model.diff_exp = as_double(v, "model.diff_exp");
                else if (k == "a") cfg.model.a_text = as_string(v, "model.a");
                else if (k == "b") cfg.model.b_text = as_string(v, "model.b");
                else throw ConfigError("unknown config key 'model." + k + "'");
            }
        } else if (key == "guards") {
            for (const auto& [k, v] : inner) {
                if (k == "explosion_threshold")
                    cfg.guards.explosion_threshold = as_double(v, "guards.explosion_threshold");
                else if (k == "absorption_floor")
                    cfg.guards.absorption_floor = as_double(v, "guards.absorption_floor");
                else if (k == "record_every")
                    cfg.guards.record_every = as_uint(v, "guards.record_every");
                else
                    throw ConfigError("unknown config key 'guards." + k + "'");
            }
        } else {
            throw ConfigError("unknown config table '" + key + "'");
        }
    }
    cfg.validate();
    return cfg;
}

inline std::string RunConfig::to_config_string() const {
    std::ostringstream os;
    if (model.family == "power") {
        os << "model = { family = \"power\", sigma = " << format_double(model.sigma)
           << ", drift_exp = " << format_double(model.drift_exp)
           << ", diff_exp = " << format_double(model.diff_exp) << " }\n";
    } else {
        os << "model = { family = \"expression\", a = \"" << model.a_text
           << "\", b = \"" << model.b_text << "\" }\n";
    }
    os << "scheme = \"" << to_string(scheme) << "\"\n";
    os << "delta = " << format_double(delta) << "\n";
    os << "steps = " << steps << "\n";
    os << "y0 = " << format_double(y0) << "\n";
    os << "seed = " << seed << "\n";
    os << "path = " << path_index << "\n";
    os << "paths = " << paths << "\n";
    os << "workers = " << workers << "\n";
    os << "eps_zero = " << format_double(eps_zero) << "\n";
    if (moment_p)
        os << "moment_p = " << format_double(*moment_p) << "\n";
    os << "guards = { explosion_threshold = " << format_double(guards.explosion_threshold)
       << ", absorption_floor = " << format_double(guards.absorption_floor)
       << ", record_every = " << guards.record_every << " }\n";
    if (!out.empty())
        os << "out = \"" << out << "\"\n";
    if (!dump_dir.empty())
        os << "dump_paths = \"" << dump_dir << "\"\n";
    return os.str();
}

} // namespace sdexp
