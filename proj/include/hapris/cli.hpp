// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: sweep orchestration over the analytic chain and the
// Monte Carlo simulator, CSV/JSON emission with an embedded parameter header,
// analytic-vs-simulation comparison, and scene dumps.
//
// Exit codes: 0 ok, 2 configuration/usage error, 3 numerical failure in at
// least one row, 4 comparison tolerances violated under `compare --strict`.

#pragma once

#include <atomic>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "hapris/analytic.hpp"
#include "hapris/config.hpp"
#include "hapris/montecarlo.hpp"

#ifndef HAPRIS_VERSION
#define HAPRIS_VERSION "0.0.0-dev"
#endif

namespace hapris::cli {

using ordered_json = nlohmann::ordered_json;

inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

struct Table {
    std::vector<std::string> columns;
    std::vector<ordered_json> rows; // objects keyed by column name
    bool any_numerical_error = false;
    bool any_tolerance_failure = false;
};

/// One evaluation point of a sweep.
struct SweepPoint {
    SystemParams params;
    double s_th_db_override = std::numeric_limits<double>::quiet_NaN();
    std::vector<std::pair<std::string, double>> labels; // grid/sweep values
    bool has_threshold_override() const {
        return !std::isnan(s_th_db_override);
    }
};

inline std::vector<SweepPoint> expand_sweep(const RunSettings& s) {
    std::vector<SweepPoint> points;
    const auto axis_values = [](const GridAxis& g) {
        return g.active() ? g.values : std::vector<double>{0.0};
    };
    const std::vector<double> g1 = axis_values(s.sweep.grid1);
    const std::vector<double> g2 = axis_values(s.sweep.grid2);
    const std::vector<double> sw =
        s.sweep.variable.empty() ? std::vector<double>{0.0} : s.sweep.values;
    for (double v1 : g1)
        for (double v2 : g2)
            for (double v : sw) {
                SweepPoint pt;
                pt.params = s.base;
                if (s.sweep.grid1.active()) {
                    apply_param(pt.params, s.sweep.grid1.variable, v1);
                    pt.labels.emplace_back(s.sweep.grid1.variable, v1);
                }
                if (s.sweep.grid2.active()) {
                    apply_param(pt.params, s.sweep.grid2.variable, v2);
                    pt.labels.emplace_back(s.sweep.grid2.variable, v2);
                }
                if (!s.sweep.variable.empty()) {
                    if (s.sweep.variable == "s_th_db")
                        pt.s_th_db_override = v;
                    else
                        apply_param(pt.params, s.sweep.variable, v);
                    pt.labels.emplace_back(s.sweep.variable, v);
                }
                points.push_back(std::move(pt));
            }
    return points;
}

/// Coverage thresholds for one point: either the swept threshold or the
/// configured list.
inline std::vector<double> point_thresholds(const RunSettings& s,
                                            const SweepPoint& pt) {
    if (pt.has_threshold_override()) return {pt.s_th_db_override};
    return s.thresholds_db;
}

inline std::string threshold_col(const std::string& prefix, double db,
                                 const std::string& suffix = "") {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%s%gdB%s", prefix.c_str(), db,
                  suffix.c_str());
    return buf;
}

namespace detail {

inline void label_columns(const RunSettings& s,
                          std::vector<std::string>& cols) {
    if (s.sweep.grid1.active()) cols.push_back(s.sweep.grid1.variable);
    if (s.sweep.grid2.active()) cols.push_back(s.sweep.grid2.variable);
    if (!s.sweep.variable.empty() && s.sweep.variable != "s_th_db")
        cols.push_back(s.sweep.variable);
    if (s.sweep.variable == "s_th_db") cols.push_back("s_th_db");
}

inline void fill_labels(const SweepPoint& pt, ordered_json& row) {
    for (const auto& [name, value] : pt.labels) {
        if (name == "num_re")
            row[name] = static_cast<int>(value);
        else
            row[name] = value;
    }
}

/// Map sweep-point evaluation over a small worker pool; row order is the
/// sweep order regardless of completion order.
template <class Fn>
void parallel_rows(std::size_t n, int threads, Fn&& fn) {
    if (threads <= 0)
        threads =
            static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    threads = static_cast<int>(std::min<std::size_t>(threads, n));
    if (threads <= 1) {
        for (std::size_t i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (int t = 0; t < threads; ++t)
        pool.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < n;
                 i = next.fetch_add(1))
                fn(i);
        });
    for (auto& th : pool) th.join();
}

} // namespace detail

/// `analytic`: fitted shapes, coverage per threshold, capacity.
inline Table run_analytic(const RunSettings& s) {
    const std::vector<SweepPoint> points = expand_sweep(s);
    Table table;
    detail::label_columns(s, table.columns);
    const std::vector<double> th_cols =
        (s.sweep.variable == "s_th_db") ? std::vector<double>{} : s.thresholds_db;
    if (s.sweep.variable == "s_th_db") {
        table.columns.push_back("pc");
    } else {
        for (double db : th_cols)
            table.columns.push_back(threshold_col("pc_", db));
    }
    for (const char* c :
         {"capacity", "capacity_closed", "closed_agrees", "alpha_n", "beta_n",
          "alpha_d", "beta_d", "scale", "flags"})
        table.columns.push_back(c);

    table.rows.resize(points.size());
    std::vector<char> errored(points.size(), 0);
    detail::parallel_rows(points.size(), s.threads, [&](std::size_t i) {
        const SweepPoint& pt = points[i];
        ordered_json row;
        detail::fill_labels(pt, row);
        try {
            pt.params.validate();
            const GammaFit fit = fit_gamma(pt.params, s.model);
            const BetaPrimeSIR sir =
                beta_prime_sir(fit, pt.params.p_o, pt.params.p_i);
            const double mass = wg_total_mass(pt.params);
            for (double db : point_thresholds(s, pt)) {
                const double s_lin = std::pow(10.0, db / 10.0);
                double pc = 1.0 - sir.cdf(s_lin);
                if (!s.condition_ris_exists) pc *= mass;
                row[pt.has_threshold_override() ? "pc"
                                                : threshold_col("pc_", db)] = pc;
            }
            const CapacityResult cap = ergodic_capacity(pt.params, s.model);
            row["capacity"] = cap.value;
            row["capacity_closed"] =
                cap.closed_form ? ordered_json(*cap.closed_form)
                                : ordered_json(nullptr);
            row["closed_agrees"] =
                cap.closed_form ? (cap.closed_form_agrees() ? "yes" : "no")
                                : "n/a";
            row["alpha_n"] = fit.alpha_n;
            row["beta_n"] = fit.beta_n;
            row["alpha_d"] = fit.alpha_d;
            row["beta_d"] = fit.beta_d;
            row["scale"] = sir.scale;
            row["flags"] = "";
        } catch (const std::exception& e) {
            row["flags"] = std::string("error: ") + e.what();
            errored[i] = 1;
        }
        table.rows[i] = std::move(row);
    });
    for (char e : errored) table.any_numerical_error |= (e != 0);
    return table;
}

/// `simulate`: Monte Carlo statistics per sweep point.
inline Table run_simulate(const RunSettings& s, bool keep_histograms = false,
                          std::vector<SimStats>* stats_out = nullptr) {
    const std::vector<SweepPoint> points = expand_sweep(s);
    Table table;
    detail::label_columns(s, table.columns);
    const bool swept_th = (s.sweep.variable == "s_th_db");
    if (swept_th) {
        table.columns.push_back("pc_mc");
        table.columns.push_back("pc_mc_se");
    } else {
        for (double db : s.thresholds_db) {
            table.columns.push_back(threshold_col("pc_mc_", db));
            table.columns.push_back(threshold_col("pc_mc_", db, "_se"));
        }
    }
    for (const char* c :
         {"trials", "capacity_mc", "capacity_mc_se", "isolation_frac",
          "inf_sir_frac", "mean_an", "var_an", "mean_ad", "var_ad",
          "mean_n_visible", "flags"})
        table.columns.push_back(c);

    McOptions mc{s.mode, s.nearest_hap_interferes};
    const bool conditional = s.model == InterferenceModel::poisson_conditioned;
    if (stats_out) stats_out->resize(points.size());
    table.rows.resize(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        const SweepPoint& pt = points[i];
        ordered_json row;
        detail::fill_labels(pt, row);
        try {
            const SimStats st = run_batch(pt.params, mc, s.trials, s.seed,
                                          point_thresholds(s, pt), s.threads);
            for (std::size_t t = 0; t < st.thresholds_db.size(); ++t) {
                const double pc = conditional ? st.coverage_conditional(t)
                                              : st.coverage_unconditional(t);
                const std::uint64_t denom =
                    conditional ? st.n_finite : st.trials;
                const std::string base =
                    swept_th ? "pc_mc"
                             : threshold_col("pc_mc_", st.thresholds_db[t]);
                row[base] = pc;
                row[base + "_se"] = st.coverage_se(pc, denom);
            }
            row["trials"] = st.trials;
            row["capacity_mc"] = st.mean_capacity_finite;
            row["capacity_mc_se"] = st.se_capacity_finite;
            row["isolation_frac"] = st.isolation_fraction();
            row["inf_sir_frac"] = st.infinite_sir_fraction();
            row["mean_an"] = st.a_n.mean;
            row["var_an"] = st.a_n.var;
            row["mean_ad"] = st.a_d.mean;
            row["var_ad"] = st.a_d.var;
            row["mean_n_visible"] = st.mean_n_visible;
            row["flags"] = "";
            if (keep_histograms) {
                ordered_json h;
                h["lo_db"] = st.histogram.lo_db;
                h["hi_db"] = st.histogram.hi_db;
                h["bins"] = st.histogram.bins;
                h["counts"] = st.histogram.counts;
                h["underflow"] = st.histogram.underflow;
                h["overflow"] = st.histogram.overflow;
                row["sir_histogram"] = std::move(h);
            }
            if (stats_out) (*stats_out)[i] = std::move(st);
        } catch (const std::exception& e) {
            row["flags"] = std::string("error: ") + e.what();
            table.any_numerical_error = true;
        }
        table.rows[i] = std::move(row);
    }
    return table;
}

/// `compare`: joined analytic and Monte Carlo rows with deviations, the KS
/// statistic of the SIR samples against the fitted CDF, and pass/fail flags.
inline Table run_compare(const RunSettings& s, bool keep_histograms = false) {
    const std::vector<SweepPoint> points = expand_sweep(s);
    Table table;
    detail::label_columns(s, table.columns);
    const bool swept_th = (s.sweep.variable == "s_th_db");
    if (swept_th) {
        for (const char* c : {"pc", "pc_mc", "pc_dev"}) table.columns.push_back(c);
    } else {
        for (double db : s.thresholds_db) {
            table.columns.push_back(threshold_col("pc_", db));
            table.columns.push_back(threshold_col("pc_mc_", db));
            table.columns.push_back(threshold_col("pc_dev_", db));
        }
    }
    for (const char* c :
         {"ks", "capacity", "capacity_mc", "capacity_mc_se", "capacity_dev_se",
          "isolation_frac", "inf_sir_frac", "pass_ks", "pass_coverage", "pass",
          "flags"})
        table.columns.push_back(c);

    McOptions mc{s.mode, s.nearest_hap_interferes};
    const bool conditional = s.model == InterferenceModel::poisson_conditioned;
    table.rows.resize(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        const SweepPoint& pt = points[i];
        ordered_json row;
        detail::fill_labels(pt, row);
        try {
            pt.params.validate();
            const GammaFit fit = fit_gamma(pt.params, s.model);
            const BetaPrimeSIR sir =
                beta_prime_sir(fit, pt.params.p_o, pt.params.p_i);
            const SimStats st = run_batch(pt.params, mc, s.trials, s.seed,
                                          point_thresholds(s, pt), s.threads);
            bool pass_cov = true;
            for (std::size_t t = 0; t < st.thresholds_db.size(); ++t) {
                const double db = st.thresholds_db[t];
                const double pc_an = 1.0 - sir.cdf(st.thresholds_lin[t]);
                const double pc_mc = conditional ? st.coverage_conditional(t)
                                                 : st.coverage_unconditional(t);
                const double dev = pc_mc - pc_an;
                pass_cov &= std::fabs(dev) < s.tol_coverage;
                if (swept_th) {
                    row["pc"] = pc_an;
                    row["pc_mc"] = pc_mc;
                    row["pc_dev"] = dev;
                } else {
                    row[threshold_col("pc_", db)] = pc_an;
                    row[threshold_col("pc_mc_", db)] = pc_mc;
                    row[threshold_col("pc_dev_", db)] = dev;
                }
            }
            const std::uint64_t ks_denom =
                conditional ? st.n_finite : st.n_finite + st.n_inf;
            const double ks = ks_statistic(
                st.sorted_sir, [&](double x) { return sir.cdf(x); }, ks_denom);
            const CapacityResult cap = ergodic_capacity(pt.params, s.model);
            const double cap_dev_se =
                st.se_capacity_finite > 0.0
                    ? std::fabs(cap.value - st.mean_capacity_finite) /
                          st.se_capacity_finite
                    : 0.0;
            const bool pass_ks = ks < s.tol_ks;
            row["ks"] = ks;
            row["capacity"] = cap.value;
            row["capacity_mc"] = st.mean_capacity_finite;
            row["capacity_mc_se"] = st.se_capacity_finite;
            row["capacity_dev_se"] = cap_dev_se;
            row["isolation_frac"] = st.isolation_fraction();
            row["inf_sir_frac"] = st.infinite_sir_fraction();
            row["pass_ks"] = pass_ks ? 1 : 0;
            row["pass_coverage"] = pass_cov ? 1 : 0;
            row["pass"] = (pass_ks && pass_cov) ? 1 : 0;
            row["flags"] = "";
            if (!(pass_ks && pass_cov)) table.any_tolerance_failure = true;
            if (keep_histograms) {
                ordered_json h;
                h["lo_db"] = st.histogram.lo_db;
                h["hi_db"] = st.histogram.hi_db;
                h["bins"] = st.histogram.bins;
                h["counts"] = st.histogram.counts;
                h["underflow"] = st.histogram.underflow;
                h["overflow"] = st.histogram.overflow;
                row["sir_histogram"] = std::move(h);
            }
        } catch (const std::exception& e) {
            row["flags"] = std::string("error: ") + e.what();
            table.any_numerical_error = true;
        }
        table.rows[i] = std::move(row);
    }
    return table;
}

inline ordered_json scene_to_json(const NetworkRealization& scene) {
    ordered_json j;
    auto points = [](const std::vector<Vec2>& v) {
        ordered_json arr = ordered_json::array();
        for (const Vec2& p : v) arr.push_back({p.x, p.y});
        return arr;
    };
    j["haps"] = points(scene.haps);
    j["riss"] = points(scene.riss);
    ordered_json rects = ordered_json::array();
    for (const Rect& r : scene.rects) {
        ordered_json o;
        o["center"] = {r.center.x, r.center.y};
        o["len"] = r.len;
        o["wid"] = r.wid;
        o["theta"] = r.theta;
        rects.push_back(std::move(o));
    }
    j["rects"] = std::move(rects);
    j["hap_visible"] = scene.hap_visible;
    j["ris_visible"] = scene.ris_visible;
    return j;
}

/// Keys embedded in every output header; runtime-only knobs (threads, out,
/// format, strict) stay out so outputs are byte-identical across them.
inline FlatConfig header_config(const RunSettings& s) {
    return config_from_settings(s);
}

inline void write_csv(std::ostream& os, const Table& table,
                      const RunSettings& s, const std::string& command) {
    os << "# hapris " << HAPRIS_VERSION << "\n";
    os << "# command: " << command << "\n";
    for (const auto& [k, v] : header_config(s)) os << "# " << k << "=" << v << "\n";
    for (std::size_t c = 0; c < table.columns.size(); ++c)
        os << (c ? "," : "") << table.columns[c];
    os << "\n";
    for (const ordered_json& row : table.rows) {
        for (std::size_t c = 0; c < table.columns.size(); ++c) {
            if (c) os << ",";
            const auto it = row.find(table.columns[c]);
            if (it == row.end() || it->is_null()) {
                os << "nan";
            } else if (it->is_number_float()) {
                os << fmt_double(it->get<double>());
            } else if (it->is_number_integer()) {
                os << it->get<long long>();
            } else if (it->is_number_unsigned()) {
                os << it->get<unsigned long long>();
            } else if (it->is_string()) {
                os << it->get<std::string>();
            } else {
                os << it->dump();
            }
        }
        os << "\n";
    }
}

inline void write_json(std::ostream& os, const Table& table,
                       const RunSettings& s, const std::string& command) {
    ordered_json j;
    j["version"] = HAPRIS_VERSION;
    j["command"] = command;
    ordered_json cfg;
    for (const auto& [k, v] : header_config(s)) cfg[k] = v;
    j["config"] = std::move(cfg);
    j["columns"] = table.columns;
    j["rows"] = table.rows;
    os << j.dump(2) << "\n";
}

struct CliArgs {
    std::string config_path;
    std::string preset;
    std::vector<std::string> sets;
    bool print_config = false;
};

inline RunSettings build_settings(const CliArgs& args,
                                  const FlatConfig& flag_overrides) {
    FlatConfig merged;
    if (!args.preset.empty()) {
        const auto& presets = preset_table();
        const auto it = presets.find(args.preset);
        if (it == presets.end())
            throw ConfigError("unknown preset '" + args.preset + "'");
        for (const auto& [k, v] :
             parse_config_text(it->second, "preset:" + args.preset))
            merged[k] = v;
    }
    if (!args.config_path.empty())
        for (const auto& [k, v] : parse_config_file(args.config_path))
            merged[k] = v;
    for (const std::string& kv : args.sets) {
        const auto [k, v] = parse_set_arg(kv);
        merged[k] = v;
    }
    for (const auto& [k, v] : flag_overrides) merged[k] = v;
    return settings_from_config(merged);
}

inline int emit(const Table& table, const RunSettings& s,
                const std::string& command) {
    std::ostringstream body;
    if (s.format == "csv")
        write_csv(body, table, s, command);
    else
        write_json(body, table, s, command);
    if (s.out == "-" || s.out.empty()) {
        std::cout << body.str();
    } else {
        std::ofstream f(s.out, std::ios::binary);
        if (!f) {
            std::cerr << "hapris: cannot open output file " << s.out << "\n";
            return 2;
        }
        f << body.str();
    }
    if (table.any_numerical_error) return 3;
    if (s.strict && table.any_tolerance_failure) return 4;
    return 0;
}

/// Full CLI entry point (argv-style, without the program name).
inline int run(std::vector<std::string> args) {
    CLI::App app{"RIS-assisted HAP network performance engine"};
    app.set_version_flag("--version", HAPRIS_VERSION);
    app.require_subcommand(1);

    CliArgs common;
    FlatConfig overrides;
    std::string mode_str, model_str, out_str, format_str;
    std::uint64_t trials = 0, seed = 0;
    int threads = -1;
    bool cond_ris = true, nearest_interferes = false, strict = false;

    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", common.config_path, "flat key=value config file");
        sub->add_option("--preset", common.preset,
                        "bundled preset (fig2..fig6)");
        sub->add_option("--set", common.sets, "override KEY=VALUE (repeatable)")
            ->take_all();
        sub->add_flag("--print-config", common.print_config,
                      "print the effective configuration and exit");
        sub->add_option("--trials", trials, "Monte Carlo trials per point")
            ->each([&](const std::string& v) { overrides["trials"] = v; });
        sub->add_option("--seed", seed, "base RNG seed")->each([&](const std::string& v) {
            overrides["seed"] = v;
        });
        sub->add_option("--mode", mode_str, "visibility mode: thinning|explicit")
            ->each([&](const std::string& v) { overrides["mode"] = v; });
        sub->add_option("--threads", threads, "worker threads (0 = auto)")
            ->each([&](const std::string& v) { overrides["threads"] = v; });
        sub->add_option("--out", out_str, "output path ('-' = stdout)")
            ->each([&](const std::string& v) { overrides["out"] = v; });
        sub->add_option("--format", format_str, "csv|json")
            ->each([&](const std::string& v) { overrides["format"] = v; });
        sub->add_option("--interference-model", model_str,
                        "fixed|poisson|poisson-cond")
            ->each([&](const std::string& v) {
                overrides["interference_model"] = v;
            });
        sub->add_option("--condition-ris-exists", cond_ris,
                        "condition coverage on a serving RIS existing")
            ->each([&](const std::string& v) {
                overrides["condition_ris_exists"] = v;
            });
        sub->add_option("--nearest-hap-interferes", nearest_interferes,
                        "include a visible nearest HAP in the interference")
            ->each([&](const std::string& v) {
                overrides["nearest_hap_interferes"] = v;
            });
    };

    CLI::App* cmd_analytic = app.add_subcommand("analytic", "closed-form sweep");
    CLI::App* cmd_simulate = app.add_subcommand("simulate", "Monte Carlo sweep");
    CLI::App* cmd_compare =
        app.add_subcommand("compare", "analytic vs Monte Carlo comparison");
    CLI::App* cmd_scene =
        app.add_subcommand("scene-dump", "sample one scene and dump it as JSON");
    add_common(cmd_analytic);
    add_common(cmd_simulate);
    add_common(cmd_compare);
    add_common(cmd_scene);
    cmd_compare->add_flag("--strict", strict,
                          "exit 4 when comparison tolerances fail");

    std::reverse(args.begin(), args.end());
    try {
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) { // --help / --version
            return app.exit(e);
        }
        app.exit(e);
        return 2;
    }

    try {
        if (strict) overrides["strict"] = "true";
        const RunSettings settings = build_settings(common, overrides);

        if (common.print_config) {
            for (const auto& [k, v] : config_from_settings(settings))
                std::cout << k << "=" << v << "\n";
            return 0;
        }

        if (cmd_scene->parsed()) {
            settings.base.validate();
            Rng rng = make_rng(settings.seed, 0);
            const NetworkRealization scene =
                sample_scene(settings.base, settings.mode, rng);
            ordered_json j;
            j["version"] = HAPRIS_VERSION;
            ordered_json cfg;
            for (const auto& [k, v] : header_config(settings)) cfg[k] = v;
            j["config"] = std::move(cfg);
            j["scene"] = scene_to_json(scene);
            if (settings.out == "-" || settings.out.empty()) {
                std::cout << j.dump(2) << "\n";
            } else {
                std::ofstream f(settings.out, std::ios::binary);
                if (!f) {
                    std::cerr << "hapris: cannot open output file "
                              << settings.out << "\n";
                    return 2;
                }
                f << j.dump(2) << "\n";
            }
            return 0;
        }

        const bool json_hist = settings.format == "json";
        if (cmd_analytic->parsed())
            return emit(run_analytic(settings), settings, "analytic");
        if (cmd_simulate->parsed())
            return emit(run_simulate(settings, json_hist), settings, "simulate");
        return emit(run_compare(settings, json_hist), settings, "compare");
    } catch (const ConfigError& e) {
        std::cerr << "hapris: config error: " << e.what() << "\n";
        return 2;
    } catch (const std::domain_error& e) {
        std::cerr << "hapris: config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "hapris: numerical failure: " << e.what() << "\n";
        return 3;
    }
}

inline int run(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(std::move(args));
}

} // namespace hapris::cli
