// SPDX-License-Identifier: Apache-2.0
//
// End-to-end trial simulator: fresh Poisson scenes per trial, serving chain
// through the nearest HAP and nearest visible RIS, interference from visible
// HAPs. Trials draw from counter-derived RNG substreams so results are
// bit-identical for a given (seed, params) regardless of thread count.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <thread>
#include <vector>

#include "hapris/channel.hpp"
#include "hapris/geometry.hpp"

namespace hapris {

enum class SirOutcome : std::uint8_t {
    finite,       // regular trial
    infinite_sir, // no visible interferer: a_d = 0
    isolated      // no visible RIS: no service
};

struct McOptions {
    VisibilityMode mode = VisibilityMode::thinning;
    /// Include the nearest HAP in the interference sum when its own
    /// visibility draw says visible. Default keeps it out: it serves via the
    /// RIS. The analytic interference moments correspond to `true`.
    bool nearest_hap_interferes = false;
};

struct TrialOutcome {
    double sir = 0.0;
    double a_n = 0.0;
    double a_d = 0.0;
    double r_q = std::numeric_limits<double>::quiet_NaN();
    double r_g = std::numeric_limits<double>::quiet_NaN();
    int n_visible_haps = 0;
    SirOutcome kind = SirOutcome::finite;
};

/// Sample one scene around a user at the origin. Draw order is fixed:
/// HAP field, RIS field, blockages (explicit mode), HAP visibility flags,
/// RIS visibility flags.
inline NetworkRealization sample_scene(const SystemParams& params,
                                       VisibilityMode mode, Rng& rng) {
    const double omega = params.window();
    NetworkRealization scene;
    scene.haps = sample_ppp(params.lambda_hap, omega, rng);
    scene.riss = sample_ppp(params.lambda_ris, omega, rng);
    if (mode == VisibilityMode::explicit_rects)
        scene.rects = sample_blockages(params, omega, rng);
    const auto db = params.blockage();
    const Vec2 user{0.0, 0.0};
    scene.hap_visible.resize(scene.haps.size());
    for (std::size_t i = 0; i < scene.haps.size(); ++i)
        scene.hap_visible[i] =
            (mode == VisibilityMode::thinning)
                ? visible_thinning(scene.haps[i].norm(), db, rng)
                : visible_explicit(user, scene.haps[i], scene.rects);
    scene.ris_visible.resize(scene.riss.size());
    for (std::size_t i = 0; i < scene.riss.size(); ++i)
        scene.ris_visible[i] =
            (mode == VisibilityMode::thinning)
                ? visible_thinning(scene.riss[i].norm(), db, rng)
                : visible_explicit(user, scene.riss[i], scene.rects);
    return scene;
}

/// Evaluate the received-signal and interference powers on a given scene.
/// Distance convention mirrors the analysis: the serving link uses the
/// horizontal user->nearest-HAP distance, the RIS leg the horizontal
/// user->nearest-visible-RIS distance.
inline TrialOutcome trial_from_scene(const SystemParams& params,
                                     const McOptions& opts,
                                     const NetworkRealization& scene,
                                     Rng& rng) {
    TrialOutcome out;
    for (std::size_t i = 0; i < scene.haps.size(); ++i)
        out.n_visible_haps += scene.hap_visible[i] ? 1 : 0;

    // nearest HAP (any visibility) serves through the RIS
    std::size_t nearest_hap = scene.haps.size();
    double best_wq = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < scene.haps.size(); ++i) {
        const double w = scene.haps[i].norm();
        if (w < best_wq) {
            best_wq = w;
            nearest_hap = i;
        }
    }
    // nearest visible RIS
    double best_wg = std::numeric_limits<double>::infinity();
    bool have_ris = false;
    for (std::size_t i = 0; i < scene.riss.size(); ++i) {
        if (!scene.ris_visible[i]) continue;
        const double w = scene.riss[i].norm();
        if (w < best_wg) {
            best_wg = w;
            have_ris = true;
        }
    }

    if (nearest_hap == scene.haps.size() || !have_ris) {
        out.kind = SirOutcome::isolated;
        out.a_n = 0.0;
        out.sir = 0.0;
        return out;
    }

    out.r_q = std::hypot(best_wq, params.h_hap);
    out.r_g = std::hypot(best_wg, params.h_ris);

    const RicianSpec q_spec{params.k_q, params.sigma2_q};
    const RicianSpec g_spec{params.k_g, params.sigma2_g};
    double sum_qg = 0.0;
    for (int l = 0; l < params.num_re; ++l)
        sum_qg += sample_rician(q_spec, rng) * sample_rician(g_spec, rng);
    out.a_n = sum_qg * sum_qg * std::pow(out.r_q, -params.eps_q) *
              std::pow(out.r_g, -params.eps_g);

    const RicianSpec h_spec{params.k_h, params.sigma2_h};
    const double h2 = params.h_hap * params.h_hap;
    double a_d = 0.0;
    for (std::size_t i = 0; i < scene.haps.size(); ++i) {
        if (!scene.hap_visible[i]) continue;
        if (i == nearest_hap && !opts.nearest_hap_interferes) continue;
        const double fade = sample_rician(h_spec, rng);
        const double w = scene.haps[i].norm();
        a_d += fade * fade * std::pow(w * w + h2, -0.5 * params.eps_h);
    }
    out.a_d = a_d;
    if (a_d == 0.0) {
        out.kind = SirOutcome::infinite_sir;
        out.sir = std::numeric_limits<double>::infinity();
    } else {
        out.kind = SirOutcome::finite;
        out.sir = params.p_o * out.a_n / (params.p_i * a_d);
    }
    return out;
}

inline TrialOutcome run_trial(const SystemParams& params,
                              const McOptions& opts, Rng& rng) {
    const NetworkRealization scene = sample_scene(params, opts.mode, rng);
    return trial_from_scene(params, opts, scene, rng);
}

/// Deterministic O(log n)-error summation; also independent of how trials
/// were scheduled because it runs over the trial-indexed array.
inline double pairwise_sum(std::span<const double> v) {
    if (v.size() <= 8) {
        double s = 0.0;
        for (double x : v) s += x;
        return s;
    }
    const std::size_t half = v.size() / 2;
    return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

struct MomentStats {
    double mean = 0.0;
    double var = 0.0;     // unbiased sample variance
    double se_mean = 0.0; // standard error of the mean
    double se_var = 0.0;  // standard error of the variance estimate
};

inline MomentStats moment_stats(std::span<const double> v) {
    MomentStats s;
    const std::size_t n = v.size();
    if (n < 2) {
        s.mean = n ? v[0] : 0.0;
        return s;
    }
    s.mean = pairwise_sum(v) / static_cast<double>(n);
    std::vector<double> c2(n), c4(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double d = v[i] - s.mean;
        c2[i] = d * d;
        c4[i] = d * d * d * d;
    }
    const double m2 = pairwise_sum(c2) / static_cast<double>(n);
    const double m4 = pairwise_sum(c4) / static_cast<double>(n);
    s.var = m2 * static_cast<double>(n) / static_cast<double>(n - 1);
    s.se_mean = std::sqrt(m2 / static_cast<double>(n));
    s.se_var = std::sqrt(std::max(m4 - m2 * m2, 0.0) / static_cast<double>(n));
    return s;
}

struct Histogram {
    double lo_db = -60.0;
    double hi_db = 60.0;
    int bins = 240;
    std::vector<std::uint64_t> counts; // bins entries
    std::uint64_t underflow = 0, overflow = 0;

    void init() { counts.assign(bins, 0); }
    void add(double sir_linear) {
        const double db = 10.0 * std::log10(sir_linear);
        if (db < lo_db) {
            ++underflow;
        } else if (db >= hi_db) {
            ++overflow;
        } else {
            ++counts[static_cast<int>((db - lo_db) / (hi_db - lo_db) * bins)];
        }
    }
};

struct SimStats {
    std::uint64_t trials = 0;
    std::vector<double> thresholds_db;
    std::vector<double> thresholds_lin;
    std::vector<std::uint64_t> covered_finite; // finite-SIR trials above th
    std::uint64_t n_finite = 0, n_inf = 0, n_iso = 0;

    MomentStats a_n; // over all trials (isolated trials contribute a_n = 0)
    MomentStats a_d;
    double mean_n_visible = 0.0;

    double mean_capacity_finite = 0.0; // E[log2(1+SIR) | finite SIR]
    double se_capacity_finite = 0.0;
    /// Floor convention: infinite-SIR trials enter with a_d = 1e-30,
    /// isolated trials with zero rate.
    double mean_capacity_floored = 0.0;

    Histogram histogram;               // finite trials only
    std::vector<double> sorted_sir;    // finite trials, ascending

    double isolation_fraction() const {
        return trials ? static_cast<double>(n_iso) / trials : 0.0;
    }
    double infinite_sir_fraction() const {
        return trials ? static_cast<double>(n_inf) / trials : 0.0;
    }
    /// Isolation is outage, an empty interference set is coverage.
    double coverage_unconditional(std::size_t i) const {
        return trials
                   ? static_cast<double>(covered_finite[i] + n_inf) / trials
                   : 0.0;
    }
    /// Among finite-SIR trials only.
    double coverage_conditional(std::size_t i) const {
        return n_finite ? static_cast<double>(covered_finite[i]) / n_finite
                        : 0.0;
    }
    double coverage_se(double p, std::uint64_t denom) const {
        return denom ? std::sqrt(std::max(p * (1.0 - p), 0.0) / denom) : 0.0;
    }
};

namespace detail {

inline constexpr double kInterferenceFloor = 1e-30;

} // namespace detail

/// Run n_trials independent trials. Deterministic for fixed (seed, params,
/// opts, n_trials) for any `threads`.
inline SimStats run_batch(const SystemParams& params, const McOptions& opts,
                          std::uint64_t n_trials, std::uint64_t seed,
                          std::vector<double> thresholds_db, int threads = 0) {
    params.validate();
    if (n_trials < 1)
        throw std::domain_error("run_batch: requires n_trials >= 1");
    if (threads <= 0)
        threads = static_cast<int>(
            std::max(1u, std::thread::hardware_concurrency()));
    threads = static_cast<int>(
        std::min<std::uint64_t>(static_cast<std::uint64_t>(threads), n_trials));

    std::vector<double> sir(n_trials), an(n_trials), ad(n_trials);
    std::vector<std::uint8_t> kind(n_trials);
    std::vector<std::int32_t> nvis(n_trials);

    const auto worker = [&](std::uint64_t begin, std::uint64_t end) {
        for (std::uint64_t i = begin; i < end; ++i) {
            Rng rng = make_rng(seed, i);
            const TrialOutcome t = run_trial(params, opts, rng);
            sir[i] = t.sir;
            an[i] = t.a_n;
            ad[i] = t.a_d;
            kind[i] = static_cast<std::uint8_t>(t.kind);
            nvis[i] = t.n_visible_haps;
        }
    };
    if (threads == 1) {
        worker(0, n_trials);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        const std::uint64_t chunk = (n_trials + threads - 1) / threads;
        for (int t = 0; t < threads; ++t) {
            const std::uint64_t b = t * chunk;
            const std::uint64_t e = std::min<std::uint64_t>(b + chunk, n_trials);
            if (b < e) pool.emplace_back(worker, b, e);
        }
        for (auto& th : pool) th.join();
    }

    // single-threaded, trial-ordered reduction
    SimStats stats;
    stats.trials = n_trials;
    stats.thresholds_db = std::move(thresholds_db);
    stats.thresholds_lin.reserve(stats.thresholds_db.size());
    for (double db : stats.thresholds_db)
        stats.thresholds_lin.push_back(std::pow(10.0, db / 10.0));
    stats.covered_finite.assign(stats.thresholds_db.size(), 0);
    stats.histogram.init();

    std::vector<double> cap_fin;
    cap_fin.reserve(n_trials);
    std::vector<double> cap_floor(n_trials);
    std::vector<double> nvis_d(n_trials);
    stats.sorted_sir.reserve(n_trials);
    for (std::uint64_t i = 0; i < n_trials; ++i) {
        nvis_d[i] = nvis[i];
        switch (static_cast<SirOutcome>(kind[i])) {
            case SirOutcome::finite: {
                ++stats.n_finite;
                stats.sorted_sir.push_back(sir[i]);
                stats.histogram.add(sir[i]);
                for (std::size_t t = 0; t < stats.thresholds_lin.size(); ++t)
                    if (sir[i] > stats.thresholds_lin[t])
                        ++stats.covered_finite[t];
                const double c = std::log2(1.0 + sir[i]);
                cap_fin.push_back(c);
                cap_floor[i] = c;
                break;
            }
            case SirOutcome::infinite_sir: {
                ++stats.n_inf;
                cap_floor[i] = std::log2(
                    1.0 + params.p_o * an[i] /
                              (params.p_i * detail::kInterferenceFloor));
                break;
            }
            case SirOutcome::isolated: {
                ++stats.n_iso;
                cap_floor[i] = 0.0;
                break;
            }
        }
    }
    std::sort(stats.sorted_sir.begin(), stats.sorted_sir.end());
    stats.a_n = moment_stats(an);
    stats.a_d = moment_stats(ad);
    stats.mean_n_visible = pairwise_sum(nvis_d) / static_cast<double>(n_trials);
    if (!cap_fin.empty()) {
        const MomentStats cs = moment_stats(cap_fin);
        stats.mean_capacity_finite = cs.mean;
        stats.se_capacity_finite = cs.se_mean;
    }
    stats.mean_capacity_floored =
        pairwise_sum(cap_floor) / static_cast<double>(n_trials);
    return stats;
}

/// Kolmogorov-Smirnov statistic of sorted samples against a CDF, with an
/// explicit denominator (pass n_finite for the conditional comparison or
/// n_finite + n_inf to treat empty-interference trials as +infinity samples).
template <class Cdf>
double ks_statistic(std::span<const double> sorted_samples, Cdf&& cdf,
                    std::uint64_t denominator) {
    double d = 0.0;
    for (std::size_t i = 0; i < sorted_samples.size(); ++i) {
        const double f = cdf(sorted_samples[i]);
        const double lo = static_cast<double>(i) / denominator;
        const double hi = static_cast<double>(i + 1) / denominator;
        d = std::max({d, std::fabs(f - lo), std::fabs(hi - f)});
    }
    return d;
}

} // namespace hapris
