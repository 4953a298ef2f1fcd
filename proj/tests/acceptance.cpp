// SPDX-License-Identifier: Apache-2.0
//
// End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
// exits with the number of failed criteria. Runs the heavy Monte Carlo
// batches once and shares them across criteria.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "hapris/analytic.hpp"
#include "hapris/cli.hpp"
#include "hapris/montecarlo.hpp"

using namespace hapris;

namespace {

int g_failures = 0;

std::vector<std::string> g_notes;

void note(const std::string& line) { g_notes.push_back(line); }

void report(int criterion, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %d: %s\n", pass ? "PASS" : "FAIL", criterion,
                detail.c_str());
    for (const std::string& line : g_notes)
        std::printf("       %s\n", line.c_str());
    g_notes.clear();
    std::fflush(stdout);
    if (!pass) ++g_failures;
}

std::string fmt(const char* f, ...) {
    char buf[512];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

SystemParams defaults_with(int num_re) {
    SystemParams p; // scenario defaults; K = 1, sigma2 = 1 on every link
    p.num_re = num_re;
    return p;
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

} // namespace

int main() {
    using clock = std::chrono::steady_clock;
    const auto t0 = clock::now();
    const std::vector<double> thresholds = {-20, -10, 0, 10, 20};
    McOptions mc;
    mc.mode = VisibilityMode::thinning;
    mc.nearest_hap_interferes = true; // the analytic field includes it

    std::printf("acceptance suite: scenario defaults, K=1, sigma2=1,"
                " thinning mode, 100000 trials per batch\n");
    std::printf("conventions: interference second moment uses the"
                " Poisson-consistent cross term for simulation comparisons;\n"
                "distribution comparisons condition both sides on at least one"
                " visible interferer (finite SIR)\n\n");

    const std::uint64_t n_trials = 100000;
    const SimStats b16 = run_batch(defaults_with(16), mc, n_trials, 101,
                                   thresholds, 0);
    const SimStats b64 = run_batch(defaults_with(64), mc, n_trials, 102,
                                   thresholds, 0);
    const SimStats b128 = run_batch(defaults_with(128), mc, n_trials, 103,
                                    thresholds, 0);

    // ---- criterion 1: KS of empirical SIR vs fitted Beta prime ------------
    {
        bool pass = true;
        std::string detail = "SIR distribution match, KS < 0.05:";
        for (const auto& [l, st] : {std::pair<int, const SimStats*>{64, &b64},
                                    {128, &b128}}) {
            const GammaFit fit = fit_gamma(
                defaults_with(l), InterferenceModel::poisson_conditioned);
            const BetaPrimeSIR sir = beta_prime_sir(fit, 1.0, 1.0);
            const double ks = ks_statistic(
                st->sorted_sir, [&](double x) { return sir.cdf(x); },
                st->n_finite);
            detail += fmt(" L=%d: %.4f", l, ks);
            pass &= ks < 0.05;
        }
        report(1, pass, detail);
    }

    // ---- criterion 2: coverage curve agreement, L = 64 --------------------
    {
        const GammaFit fit = fit_gamma(defaults_with(64),
                                       InterferenceModel::poisson_conditioned);
        const BetaPrimeSIR sir = beta_prime_sir(fit, 1.0, 1.0);
        bool pass = true;
        double worst = 0.0;
        std::string per_point = "";
        for (std::size_t t = 0; t < thresholds.size(); ++t) {
            const double pc_an = 1.0 - sir.cdf(b64.thresholds_lin[t]);
            const double pc_mc = b64.coverage_conditional(t);
            const double dev = std::fabs(pc_mc - pc_an);
            worst = std::max(worst, dev);
            pass &= dev < 0.03;
            per_point += fmt(" %+g dB: %.4f", thresholds[t], dev);
        }
        note("|analytic - simulated| per threshold:" + per_point);
        report(2, pass,
               fmt("coverage deviation < 0.03 per point (L=64), worst %.4f",
                   worst));
    }

    // ---- criterion 3: reported coverage point values ----------------------
    {
        const double pc256 = coverage_probability(1.0, defaults_with(256));
        const double pc128 = coverage_probability(1.0, defaults_with(128));
        const bool pass = pc256 >= 0.78 && pc256 <= 0.94 && pc128 >= 0.18 &&
                          pc128 <= 0.34 && (pc256 - pc128) > 0.4;
        report(3, pass,
               fmt("coverage at 0 dB: L=256 -> %.4f (in [0.78,0.94]), "
                   "L=128 -> %.4f (in [0.18,0.34]), gap %.4f (> 0.4)",
                   pc256, pc128, pc256 - pc128));
    }

    // ---- criterion 4: moment chain vs simulation, 3 standard errors -------
    {
        bool pass = true;
        for (const auto& [l, st] : {std::pair<int, const SimStats*>{16, &b16},
                                    {64, &b64}}) {
            const SystemParams p = defaults_with(l);
            const double ean = mean_an(p);
            const double van = second_moment_an(p) - ean * ean;
            const double ead = mean_ad(p);
            const double vad_poisson =
                second_moment_ad(p, InterferenceModel::poisson) - ead * ead;
            const double vad_fixed =
                second_moment_ad(p, InterferenceModel::fixed_mvis) - ead * ead;
            const double d_ean = std::fabs(st->a_n.mean - ean) / st->a_n.se_mean;
            const double d_van = std::fabs(st->a_n.var - van) / st->a_n.se_var;
            const double d_ead = std::fabs(st->a_d.mean - ead) / st->a_d.se_mean;
            const double d_vad =
                std::fabs(st->a_d.var - vad_poisson) / st->a_d.se_var;
            pass &= d_ean < 3.0 && d_van < 3.0 && d_ead < 3.0 && d_vad < 3.0;
            note(fmt("L=%d deviations (SE units): E[An] %.2f, Var[An] %.2f,"
                     " E[Ad] %.2f, Var[Ad] %.2f",
                     l, d_ean, d_van, d_ead, d_vad));
            note(fmt("L=%d fixed-count Var[Ad] would sit %.0f SE away"
                     " (%.3e vs simulated %.3e)",
                     l, std::fabs(st->a_d.var - vad_fixed) / st->a_d.se_var,
                     vad_fixed, st->a_d.var));
        }
        report(4, pass,
               "moment chain (E/Var of signal and interference powers) within"
               " 3 SE at L=16,64");
    }

    // ---- criterion 5: capacity consistency ---------------------------------
    {
        // (a) closed form vs quadrature wherever the series form is valid
        bool pass_a = true;
        int valid_cases = 0;
        for (int l : {8, 16, 32, 64, 128}) {
            for (auto model :
                 {InterferenceModel::fixed_mvis, InterferenceModel::poisson}) {
                for (double k : {1.0, 10.0}) {
                    SystemParams p = defaults_with(l);
                    p.k_q = p.k_g = p.k_h = k;
                    const CapacityResult cap = ergodic_capacity(p, model);
                    if (!cap.closed_form) continue;
                    ++valid_cases;
                    const double rel =
                        std::fabs(*cap.closed_form - cap.value) /
                        std::fabs(cap.value);
                    if (rel > 1e-4) {
                        pass_a = false;
                        note(fmt("closed form mismatch: L=%d model=%s K=%g"
                                 " rel=%.2e",
                                 l, to_string(model), k, rel));
                    }
                }
            }
        }
        note(fmt("closed form valid in %d parameter cases, all within rel"
                 " 1e-4: %s",
                 valid_cases, pass_a ? "yes" : "no"));

        // (b) quadrature vs simulated mean rate at L = 128
        const CapacityResult cap128 =
            ergodic_capacity(defaults_with(128), InterferenceModel::poisson);
        const double dev_se =
            std::fabs(cap128.value - b128.mean_capacity_finite) /
            b128.se_capacity_finite;
        const bool pass_b = dev_se <= 3.0;
        note(fmt("quadrature %.4f vs simulated finite-SIR mean %.4f +- %.4f:"
                 " %.1f SE (L=128)",
                 cap128.value, b128.mean_capacity_finite,
                 b128.se_capacity_finite, dev_se));

        // (c) degenerate-trial fractions
        const double iso = b128.isolation_fraction();
        const double inf = b128.infinite_sir_fraction();
        const bool pass_c = iso < 0.01 && inf < 0.01;
        note(fmt("isolation fraction %.2e, infinite-SIR fraction %.4f"
                 " (analytic atom exp(-M_vis) = %.4f)",
                 iso, inf, prob_no_visible_hap(defaults_with(128))));

        if (!pass_b || !pass_c)
            note("the two-moment gamma fit cannot represent the"
                 " zero-interferer atom; see README (approximation limits)");
        report(5, pass_a && valid_cases > 0 && pass_b && pass_c,
               fmt("capacity consistency: closed-form/quadrature %s,"
                   " quadrature vs simulation %.1f SE (<= 3),"
                   " degenerate fractions %s 1%%",
                   pass_a ? "agree" : "DISAGREE", dev_se,
                   pass_c ? "below" : "above"));
    }

    // ---- criterion 6: parameter trends -------------------------------------
    {
        bool pass = true;
        // coverage non-increasing in HAP density
        double prev = 2.0;
        std::string s_a = "coverage@0dB vs lambda_hap:";
        for (double lam : {5e-6, 10e-6, 15e-6, 20e-6}) {
            SystemParams p = defaults_with(256);
            p.lambda_hap = lam;
            const double pc = coverage_probability(1.0, p);
            s_a += fmt(" %.4f", pc);
            pass &= pc <= prev + 1e-12;
            prev = pc;
        }
        note(s_a);
        // capacity non-increasing in RIS height
        prev = 1e9;
        std::string s_b = "capacity vs h_ris:";
        for (double h : {25.0, 50.0, 100.0, 200.0}) {
            SystemParams p = defaults_with(128);
            p.h_ris = h;
            const double c = ergodic_capacity(p).value;
            s_b += fmt(" %.4f", c);
            pass &= c <= prev + 1e-12;
            prev = c;
        }
        note(s_b);
        // capacity saturating in RIS density
        std::vector<double> caps;
        std::string s_c = "capacity vs lambda_ris:";
        for (double lam :
             {1e-4, 2e-4, 4e-4, 8e-4, 16e-4, 32e-4, 64e-4}) {
            SystemParams p = defaults_with(128);
            p.lambda_ris = lam;
            caps.push_back(ergodic_capacity(p).value);
            s_c += fmt(" %.4f", caps.back());
        }
        note(s_c);
        for (std::size_t i = 1; i < caps.size(); ++i)
            pass &= caps[i] >= caps[i - 1] - 1e-12;
        const double last_gain = caps[caps.size() - 1] - caps[caps.size() - 2];
        const double total_gain = caps.back() - caps.front();
        pass &= last_gain < 0.05 * total_gain;
        note(fmt("last doubling contributes %.1f%% of the total gain (< 5%%)",
                 100.0 * last_gain / total_gain));
        // coverage non-decreasing in blockage density (dense interferers)
        prev = -1.0;
        std::string s_d = "coverage@0dB vs lambda_b:";
        for (double lb : {0.5e-4, 1e-4, 2e-4, 3e-4}) {
            SystemParams p = defaults_with(256);
            p.lambda_hap = 15e-6;
            p.lambda_b = lb;
            const double pc = coverage_probability(1.0, p);
            s_d += fmt(" %.4f", pc);
            pass &= pc >= prev - 1e-12;
            prev = pc;
        }
        note(s_d);
        report(6, pass,
               "trends: coverage down in lambda_hap, capacity down in h_ris,"
               " capacity saturating in lambda_ris, coverage up in lambda_b");
    }

    // ---- criterion 7: special-function invariants, bounded runtime ---------
    {
        const auto t7 = clock::now();
        bool pass = true;
        // recurrence Gamma(a+1,x) = a Gamma(a,x) + x^a e^{-x}
        for (double a = -3.0; a <= 5.0; a += 0.25) {
            for (double x : {0.1, 0.5, 1.0, 3.0, 10.0, 30.0, 100.0}) {
                const double lhs = upper_incomplete_gamma(a + 1.0, x);
                const double rhs = a * upper_incomplete_gamma(a, x) +
                                   std::exp(a * std::log(x) - x);
                pass &= std::fabs(lhs - rhs) <=
                        1e-8 * std::max(std::fabs(lhs), std::fabs(rhs));
            }
        }
        // 1F1(2;1;z) = e^z (1 + z)
        for (double z = 0.0; z <= 30.0; z += 0.5)
            pass &= std::fabs(hyp1f1(2.0, 1.0, z) - std::exp(z) * (1.0 + z)) <=
                    1e-9 * std::exp(z) * (1.0 + z);
        // Euler transformation
        for (double z = 0.0; z <= 0.9; z += 0.03) {
            const double lhs = hyp2f1(0.7, 1.4, 2.2, z);
            const double rhs = std::pow(1.0 - z, 0.1) *
                               hyp2f1(1.5, 0.8, 2.2, z);
            pass &= std::fabs(lhs - rhs) <= 1e-7 * std::fabs(lhs);
        }
        // scaled upper gamma vs quadrature
        for (double a : {-1.0, -0.5, 0.0, 1.0}) {
            for (double x : {1.0, 10.0, 1000.0}) {
                const double quad = adaptive_quad(
                    [&](double u) {
                        return std::exp((a - 1.0) * std::log(x + u) - u);
                    },
                    0.0, std::numeric_limits<double>::infinity(),
                    {1e-300, 1e-10, 4000});
                pass &= std::fabs(exp_scaled_upper_gamma(a, x) - quad) <=
                        1e-6 * quad;
            }
        }
        const double secs =
            std::chrono::duration<double>(clock::now() - t7).count();
        pass &= secs < 30.0;
        report(7, pass,
               fmt("special-function invariant suite in %.2f s (< 30 s)",
                   secs));
    }

    // ---- criterion 8: byte-identical output across thread counts -----------
    {
        const std::vector<std::string> base = {
            "compare", "--set", "num_re=16",   "--set",
            "trials=10000",     "--set",       "thresholds_db=-10,0,10",
            "--seed",  "77"};
        auto run_with = [&](const char* threads, const char* out) {
            std::vector<std::string> args = base;
            args.insert(args.end(),
                        {"--threads", threads, "--out", out});
            return cli::run(args);
        };
        const int rc1 = run_with("1", "acceptance_cmp1.csv");
        const int rc2 = run_with("4", "acceptance_cmp2.csv");
        const std::string f1 = slurp("acceptance_cmp1.csv");
        const std::string f2 = slurp("acceptance_cmp2.csv");
        const bool pass = rc1 == 0 && rc2 == 0 && !f1.empty() && f1 == f2;
        std::remove("acceptance_cmp1.csv");
        std::remove("acceptance_cmp2.csv");
        report(8, pass,
               "compare with --threads 1 and --threads 4 produces"
               " byte-identical CSV output");
    }

    const double total =
        std::chrono::duration<double>(clock::now() - t0).count();
    std::printf("\n%d of 8 criteria failed; total runtime %.1f s\n",
                g_failures, total);
    return g_failures;
}
