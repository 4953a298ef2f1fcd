// SPDX-License-Identifier: Apache-2.0
//
// Flat key=value configuration: file parsing, presets, `--set` overrides and
// the mapping onto SystemParams / sweep / run settings.

#pragma once

#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "hapris/analytic.hpp"
#include "hapris/geometry.hpp"
#include "hapris/montecarlo.hpp"

namespace hapris {

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

using FlatConfig = std::map<std::string, std::string>;

namespace detail {

inline std::string trim(const std::string& s) {
    std::size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return s.substr(b, e - b);
}

} // namespace detail

/// Parse `key = value` lines; '#' starts a comment, blank lines are skipped.
inline FlatConfig parse_config_text(const std::string& text,
                                    const std::string& origin = "<string>") {
    FlatConfig cfg;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = detail::trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(lineno) +
                              ": expected key=value, got '" + line + "'");
        const std::string key = detail::trim(line.substr(0, eq));
        const std::string val = detail::trim(line.substr(eq + 1));
        if (key.empty())
            throw ConfigError(origin + ":" + std::to_string(lineno) +
                              ": empty key");
        cfg[key] = val;
    }
    return cfg;
}

inline FlatConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), path);
}

/// Parse "k=v" as used by --set.
inline std::pair<std::string, std::string> parse_set_arg(const std::string& kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos)
        throw ConfigError("--set expects KEY=VALUE, got '" + kv + "'");
    return {detail::trim(kv.substr(0, eq)), detail::trim(kv.substr(eq + 1))};
}

/// Value lists: "a,b,c" or "from:step:to" (inclusive ends).
inline std::vector<double> parse_value_list(const std::string& text,
                                            const std::string& key) {
    std::vector<double> out;
    const std::string t = detail::trim(text);
    if (t.empty()) return out;
    const auto parse_num = [&](const std::string& s) {
        try {
            std::size_t pos = 0;
            const double v = std::stod(s, &pos);
            if (pos != detail::trim(s).size() && pos != s.size())
                throw std::invalid_argument(s);
            return v;
        } catch (const std::exception&) {
            throw ConfigError(key + ": cannot parse number '" + s + "'");
        }
    };
    if (t.find(':') != std::string::npos) {
        std::istringstream in(t);
        std::string a, b, c;
        if (!std::getline(in, a, ':') || !std::getline(in, b, ':') ||
            !std::getline(in, c))
            throw ConfigError(key + ": range syntax is from:step:to");
        const double from = parse_num(a), step = parse_num(b), to = parse_num(c);
        if (step == 0.0 || (to - from) * step < 0.0)
            throw ConfigError(key + ": empty range " + t);
        for (double v = from; (step > 0) ? v <= to + 1e-12 * std::fabs(step)
                                         : v >= to - 1e-12 * std::fabs(step);
             v += step)
            out.push_back(v);
        return out;
    }
    std::istringstream in(t);
    std::string item;
    while (std::getline(in, item, ',')) out.push_back(parse_num(item));
    return out;
}

inline bool parse_bool(const std::string& v, const std::string& key) {
    if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
    if (v == "false" || v == "0" || v == "no" || v == "off") return false;
    throw ConfigError(key + ": expected boolean, got '" + v + "'");
}

/// Apply a scenario-parameter key; returns false if the key is not one.
inline bool apply_param(SystemParams& p, const std::string& key, double v) {
    if (key == "lambda_hap") p.lambda_hap = v;
    else if (key == "lambda_ris") p.lambda_ris = v;
    else if (key == "lambda_b") p.lambda_b = v;
    else if (key == "h_hap") p.h_hap = v;
    else if (key == "h_ris") p.h_ris = v;
    else if (key == "mean_len") p.mean_len = v;
    else if (key == "mean_wid") p.mean_wid = v;
    else if (key == "mean_len_wid") { p.mean_len = v; p.mean_wid = v; }
    else if (key == "num_re") p.num_re = static_cast<int>(v);
    else if (key == "k_q") p.k_q = v;
    else if (key == "k_g") p.k_g = v;
    else if (key == "k_h") p.k_h = v;
    else if (key == "k_factor") { p.k_q = v; p.k_g = v; p.k_h = v; }
    else if (key == "sigma2_q") p.sigma2_q = v;
    else if (key == "sigma2_g") p.sigma2_g = v;
    else if (key == "sigma2_h") p.sigma2_h = v;
    else if (key == "sigma2") { p.sigma2_q = v; p.sigma2_g = v; p.sigma2_h = v; }
    else if (key == "eps_q") p.eps_q = v;
    else if (key == "eps_g") p.eps_g = v;
    else if (key == "eps_h") p.eps_h = v;
    else if (key == "eps") { p.eps_q = v; p.eps_g = v; p.eps_h = v; }
    else if (key == "p_o") p.p_o = v;
    else if (key == "p_i") p.p_i = v;
    else if (key == "window_radius") p.window_radius = v;
    else return false;
    return true;
}

/// Sweepable variables (the pseudo-keys fan out to their fields).
inline bool is_sweep_variable(const std::string& key) {
    return key == "s_th_db" || key == "lambda_hap" || key == "lambda_ris" ||
           key == "lambda_b" || key == "h_ris" || key == "num_re" ||
           key == "k_factor" || key == "mean_len_wid";
}

struct GridAxis {
    std::string variable;
    std::vector<double> values;
    bool active() const { return !variable.empty(); }
};

struct SweepSpec {
    std::string variable;       // empty: single point
    std::vector<double> values; // the swept values
    GridAxis grid1, grid2;
};

struct RunSettings {
    SystemParams base;
    SweepSpec sweep;
    std::uint64_t trials = 10000;
    std::uint64_t seed = 0;
    VisibilityMode mode = VisibilityMode::thinning;
    int threads = 0; // 0 = hardware concurrency
    std::vector<double> thresholds_db = {-20, -10, 0, 10, 20};
    InterferenceModel model = InterferenceModel::fixed_mvis;
    bool condition_ris_exists = true;
    bool nearest_hap_interferes = false;
    bool strict = false;
    double tol_ks = 0.05;
    double tol_coverage = 0.03;
    std::string out = "-";
    std::string format = "csv";
};

inline RunSettings settings_from_config(const FlatConfig& cfg) {
    RunSettings s;
    const auto num = [&](const std::string& key, const std::string& v) {
        try {
            return std::stod(v);
        } catch (const std::exception&) {
            throw ConfigError(key + ": cannot parse number '" + v + "'");
        }
    };
    // pseudo-keys (k_factor, sigma2, eps, mean_len_wid) first so that the
    // specific per-link keys win when both are given
    const auto is_pseudo = [](const std::string& k) {
        return k == "k_factor" || k == "sigma2" || k == "eps" ||
               k == "mean_len_wid";
    };
    for (const auto& [key, value] : cfg)
        if (is_pseudo(key)) apply_param(s.base, key, num(key, value));
    for (const auto& [key, value] : cfg) {
        if (is_pseudo(key)) continue;
        if (key == "trials") s.trials = static_cast<std::uint64_t>(num(key, value));
        else if (key == "seed") s.seed = static_cast<std::uint64_t>(num(key, value));
        else if (key == "threads") s.threads = static_cast<int>(num(key, value));
        else if (key == "mode") {
            if (value == "thinning") s.mode = VisibilityMode::thinning;
            else if (value == "explicit") s.mode = VisibilityMode::explicit_rects;
            else throw ConfigError("mode: expected thinning|explicit, got '" + value + "'");
        } else if (key == "thresholds_db") {
            s.thresholds_db = parse_value_list(value, key);
            if (s.thresholds_db.empty())
                throw ConfigError("thresholds_db: empty list");
        } else if (key == "interference_model") {
            if (value == "fixed") s.model = InterferenceModel::fixed_mvis;
            else if (value == "poisson") s.model = InterferenceModel::poisson;
            else if (value == "poisson-cond")
                s.model = InterferenceModel::poisson_conditioned;
            else
                throw ConfigError(
                    "interference_model: expected fixed|poisson|poisson-cond, got '" +
                    value + "'");
        } else if (key == "condition_ris_exists") {
            s.condition_ris_exists = parse_bool(value, key);
        } else if (key == "nearest_hap_interferes") {
            s.nearest_hap_interferes = parse_bool(value, key);
        } else if (key == "strict") {
            s.strict = parse_bool(value, key);
        } else if (key == "tol.ks") {
            s.tol_ks = num(key, value);
        } else if (key == "tol.coverage") {
            s.tol_coverage = num(key, value);
        } else if (key == "out") {
            s.out = value;
        } else if (key == "format") {
            if (value != "csv" && value != "json")
                throw ConfigError("format: expected csv|json, got '" + value + "'");
            s.format = value;
        } else if (key == "sweep.variable") {
            if (!is_sweep_variable(value))
                throw ConfigError("sweep.variable: unknown variable '" + value + "'");
            s.sweep.variable = value;
        } else if (key == "sweep.values") {
            s.sweep.values = parse_value_list(value, key);
        } else if (key == "grid1.variable") {
            if (!is_sweep_variable(value))
                throw ConfigError("grid1.variable: unknown variable '" + value + "'");
            s.sweep.grid1.variable = value;
        } else if (key == "grid1.values") {
            s.sweep.grid1.values = parse_value_list(value, key);
        } else if (key == "grid2.variable") {
            if (!is_sweep_variable(value))
                throw ConfigError("grid2.variable: unknown variable '" + value + "'");
            s.sweep.grid2.variable = value;
        } else if (key == "grid2.values") {
            s.sweep.grid2.values = parse_value_list(value, key);
        } else if (apply_param(s.base, key, num(key, value))) {
            // scenario parameter
        } else {
            throw ConfigError("unknown configuration key '" + key + "'");
        }
    }
    if (!s.sweep.variable.empty() && s.sweep.values.empty())
        throw ConfigError("sweep.values: must be non-empty when sweep.variable is set");
    if (s.sweep.grid1.active() && s.sweep.grid1.values.empty())
        throw ConfigError("grid1.values: must be non-empty when grid1.variable is set");
    if (s.sweep.grid2.active() && s.sweep.grid2.values.empty())
        throw ConfigError("grid2.values: must be non-empty when grid2.variable is set");
    if (s.trials < 1) throw ConfigError("trials: must be >= 1");
    return s;
}

/// Canonical flat dump of effective settings; re-parses to the same settings.
inline FlatConfig config_from_settings(const RunSettings& s) {
    FlatConfig cfg;
    char buf[64];
    const auto put = [&](const std::string& k, double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        cfg[k] = buf;
    };
    const auto put_list = [&](const std::string& k,
                              const std::vector<double>& vs) {
        std::string out;
        for (std::size_t i = 0; i < vs.size(); ++i) {
            std::snprintf(buf, sizeof buf, "%.17g", vs[i]);
            if (i) out += ',';
            out += buf;
        }
        cfg[k] = out;
    };
    const SystemParams& p = s.base;
    put("lambda_hap", p.lambda_hap);
    put("lambda_ris", p.lambda_ris);
    put("lambda_b", p.lambda_b);
    put("h_hap", p.h_hap);
    put("h_ris", p.h_ris);
    put("mean_len", p.mean_len);
    put("mean_wid", p.mean_wid);
    cfg["num_re"] = std::to_string(p.num_re);
    put("k_q", p.k_q);
    put("k_g", p.k_g);
    put("k_h", p.k_h);
    put("sigma2_q", p.sigma2_q);
    put("sigma2_g", p.sigma2_g);
    put("sigma2_h", p.sigma2_h);
    put("eps_q", p.eps_q);
    put("eps_g", p.eps_g);
    put("eps_h", p.eps_h);
    put("p_o", p.p_o);
    put("p_i", p.p_i);
    put("window_radius", p.window_radius);
    cfg["trials"] = std::to_string(s.trials);
    cfg["seed"] = std::to_string(s.seed);
    cfg["mode"] = s.mode == VisibilityMode::thinning ? "thinning" : "explicit";
    cfg["interference_model"] = to_string(s.model);
    cfg["condition_ris_exists"] = s.condition_ris_exists ? "true" : "false";
    cfg["nearest_hap_interferes"] = s.nearest_hap_interferes ? "true" : "false";
    put("tol.ks", s.tol_ks);
    put("tol.coverage", s.tol_coverage);
    put_list("thresholds_db", s.thresholds_db);
    if (!s.sweep.variable.empty()) {
        cfg["sweep.variable"] = s.sweep.variable;
        put_list("sweep.values", s.sweep.values);
    }
    if (s.sweep.grid1.active()) {
        cfg["grid1.variable"] = s.sweep.grid1.variable;
        put_list("grid1.values", s.sweep.grid1.values);
    }
    if (s.sweep.grid2.active()) {
        cfg["grid2.variable"] = s.sweep.grid2.variable;
        put_list("grid2.values", s.sweep.grid2.values);
    }
    return cfg;
}

/// Bundled presets mirroring the shipped files under configs/.
inline const std::map<std::string, std::string>& preset_table() {
    static const std::map<std::string, std::string> presets = {
        {"fig2",
         "# SIR-distribution comparison: simulation vs fitted Beta prime\n"
         "sweep.variable = num_re\n"
         "sweep.values = 64,128\n"
         "trials = 100000\n"
         "mode = thinning\n"
         "thresholds_db = -20,-10,0,10,20\n"
         "interference_model = poisson-cond\n"
         "nearest_hap_interferes = true\n"},
        {"fig3",
         "# coverage vs SIR threshold for RE counts and Rician factors\n"
         "sweep.variable = s_th_db\n"
         "sweep.values = -30:5:30\n"
         "grid1.variable = num_re\n"
         "grid1.values = 128,256\n"
         "grid2.variable = k_factor\n"
         "grid2.values = 1,10\n"},
        {"fig4",
         "# coverage/capacity vs HAP density at 0 dB\n"
         "sweep.variable = lambda_hap\n"
         "sweep.values = 5e-6,10e-6,15e-6,20e-6\n"
         "grid1.variable = num_re\n"
         "grid1.values = 128,256\n"
         "grid2.variable = k_factor\n"
         "grid2.values = 1,10\n"
         "thresholds_db = 0\n"},
        {"fig5",
         "# capacity vs RIS height\n"
         "sweep.variable = h_ris\n"
         "sweep.values = 25,50,100,200\n"
         "grid1.variable = num_re\n"
         "grid1.values = 128,256\n"
         "grid2.variable = k_factor\n"
         "grid2.values = 1,10\n"
         "thresholds_db = 0\n"},
        {"fig6",
         "# coverage at 0 dB vs blockage density for building sizes\n"
         "sweep.variable = lambda_b\n"
         "sweep.values = 1e-5,2e-5,5e-5,1e-4,1.5e-4,2e-4,2.5e-4,3e-4\n"
         "grid1.variable = mean_len_wid\n"
         "grid1.values = 15,25,35\n"
         "num_re = 256\n"
         "lambda_hap = 15e-6\n"
         "k_factor = 1\n"
         "thresholds_db = 0\n"}};
    return presets;
}

} // namespace hapris
