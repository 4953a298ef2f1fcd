// SPDX-License-Identifier: Apache-2.0
//
// Values marked "oracle" were computed with independent tooling (mpmath /
// adaptive quadrature at 40 digits) and frozen.

#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "hapris/analytic.hpp"

using namespace hapris;

namespace {
const SystemParams kDefaults;

double rel_err(double got, double want) {
    return std::fabs(got - want) / std::fabs(want);
}

SystemParams with_num_re(int l) {
    SystemParams p = kDefaults;
    p.num_re = l;
    return p;
}

// independent trapezoid oracle
template <class F>
double trapezoid(F f, double lo, double hi, int nodes) {
    const double h = (hi - lo) / (nodes - 1);
    double sum = 0.5 * (f(lo) + f(hi));
    for (int i = 1; i < nodes - 1; ++i) sum += f(lo + i * h);
    return sum * h;
}
} // namespace

TEST_CASE("moment_rq against the frozen oracle and its defining integral") {
    CHECK(rel_err(moment_rq(2.0, kDefaults), 3.9998981460e-10) < 1e-8); // oracle
    CHECK(rel_err(moment_rq(4.0, kDefaults), 1.5999185189e-19) < 1e-8); // oracle
    for (double t : {1.0, 2.0, 4.0}) {
        const double lam = kDefaults.lambda_hap;
        const double h2 = kDefaults.h_hap * kDefaults.h_hap;
        const double quarterexp = 0.25 * t * kDefaults.eps_q;
        const double quad = adaptive_quad(
            [&](double w) {
                return 2.0 * std::numbers::pi * lam * w *
                       std::pow(w * w + h2, -quarterexp) *
                       std::exp(-std::numbers::pi * lam * w * w);
            },
            0.0, std::numeric_limits<double>::infinity(), {1e-300, 1e-10, 4000});
        INFO("t=" << t);
        CHECK(rel_err(moment_rq(t, kDefaults), quad) < 1e-6);
    }
    // dense field: the nearest HAP is essentially overhead
    SystemParams dense = kDefaults;
    dense.lambda_hap = 1.0;
    CHECK(rel_err(moment_rq(2.0, dense), std::pow(dense.h_hap, -2.0)) < 1e-6);
}

TEST_CASE("moment_rh against a brute-force trapezoid oracle") {
    CHECK(rel_err(moment_rh(1.0, kDefaults), 3.9990625400e-10) < 1e-8); // oracle
    CHECK(rel_err(moment_rh(2.0, kDefaults), 1.5992503105e-19) < 1e-8); // oracle
    const auto db = kDefaults.blockage();
    const double omega = kDefaults.window();
    const double h2 = kDefaults.h_hap * kDefaults.h_hap;
    const double norm = 1.0 - (db.zeta * omega + 1.0) * std::exp(-db.zeta * omega);
    const double oracle =
        db.zeta * db.zeta / norm *
        trapezoid(
            [&](double w) {
                return w * std::pow(w * w + h2, -1.0) * std::exp(-db.zeta * w);
            },
            0.0, omega, 1000001);
    CHECK(rel_err(moment_rh(1.0, kDefaults), oracle) < 1e-6);
    CHECK(moment_rh(0.0, kDefaults) == Catch::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("moment_rg mass, oracle value, and the no-blockage reduction") {
    CHECK(rel_err(moment_rg(0.0, kDefaults), wg_total_mass(kDefaults)) < 1e-8);
    CHECK(rel_err(moment_rg(2.0, kDefaults), 1.5060667640e-4) < 1e-7); // oracle
    CHECK(rel_err(moment_rg(4.0, kDefaults), 3.2403016524e-8) < 1e-7); // oracle

    const auto db = kDefaults.blockage();
    const double h2 = kDefaults.h_ris * kDefaults.h_ris;
    const double oracle =
        2.0 * std::numbers::pi * kDefaults.lambda_ris * std::exp(-db.rho) *
        trapezoid(
            [&](double w) {
                return w * std::pow(w * w + h2, -0.5) *
                       std::exp(-(db.zeta * w +
                                  2.0 * std::numbers::pi * kDefaults.lambda_ris *
                                      detail::wg_u(w, db)));
            },
            0.0, 20000.0, 1000001);
    CHECK(rel_err(moment_rg(1.0, kDefaults), oracle) < 1e-6);

    // lambda_b -> 0: the visible-RIS distance degenerates to the plain
    // nearest-point law, whose moment has the same closed form as moment_rq
    // with the RIS density and height
    SystemParams open_sky = kDefaults;
    open_sky.lambda_b = 1e-14;
    SystemParams as_rq = kDefaults;
    as_rq.lambda_hap = kDefaults.lambda_ris;
    as_rq.h_hap = kDefaults.h_ris;
    as_rq.eps_q = kDefaults.eps_g;
    CHECK(rel_err(moment_rg(2.0, open_sky), moment_rq(2.0, as_rq)) < 1e-4);
}

TEST_CASE("mean_an structure") {
    const auto q = RicianSpec{kDefaults.k_q, kDefaults.sigma2_q};
    const auto g = RicianSpec{kDefaults.k_g, kDefaults.sigma2_g};
    // L = 1: no cross term
    const double want1 = rician_moment(q, 2.0) * rician_moment(g, 2.0) *
                         moment_rq(2.0, kDefaults) * moment_rg(2.0, kDefaults);
    CHECK(rel_err(mean_an(with_num_re(1)), want1) < 1e-12);
    // L^2 growth: doubling L approaches a factor 4
    const double ratio = mean_an(with_num_re(4096)) / mean_an(with_num_re(2048));
    CHECK(ratio > 3.9);
    CHECK(ratio < 4.0);
}

TEST_CASE("second_moment_an multinomial structure") {
    // L = 1: single term
    const auto q = RicianSpec{kDefaults.k_q, kDefaults.sigma2_q};
    const auto g = RicianSpec{kDefaults.k_g, kDefaults.sigma2_g};
    const double want1 = rician_moment(q, 4.0) * rician_moment(g, 4.0) *
                         moment_rq(4.0, kDefaults) * moment_rg(4.0, kDefaults);
    CHECK(rel_err(second_moment_an(with_num_re(1)), want1) < 1e-12);
    // deterministic unit fading, L = 2: the multinomial terms sum to
    // (x1+x2)^4 = 16
    SystemParams det = with_num_re(2);
    det.k_q = det.k_g = 1e12;
    const double fading_sum = second_moment_an(det) /
                              (moment_rq(4.0, det) * moment_rg(4.0, det));
    CHECK(std::fabs(fading_sum - 16.0) < 1e-3);
}

TEST_CASE("gamma fit identities") {
    for (auto model : {InterferenceModel::fixed_mvis, InterferenceModel::poisson,
                       InterferenceModel::poisson_conditioned}) {
        const GammaFit fit = fit_gamma(kDefaults, model);
        CHECK(fit.alpha_n > 0);
        CHECK(fit.beta_n > 0);
        CHECK(fit.alpha_d > 0);
        CHECK(fit.beta_d > 0);
        double ead = mean_ad(kDefaults);
        if (model == InterferenceModel::poisson_conditioned)
            ead /= 1.0 - prob_no_visible_hap(kDefaults);
        CHECK(rel_err(fit.alpha_n * fit.beta_n, mean_an(kDefaults)) < 1e-10);
        CHECK(rel_err(fit.alpha_d * fit.beta_d, ead) < 1e-10);
    }
    // frozen fit at the defaults, L = 64 (oracle)
    const GammaFit fixed = fit_gamma(with_num_re(64));
    CHECK(rel_err(fixed.alpha_n, 2.12040017046) < 1e-7);
    CHECK(rel_err(fixed.beta_n, 7.91537714352e-11) < 1e-7);
    CHECK(rel_err(fixed.alpha_d, 3.88369243206) < 1e-7);
    CHECK(rel_err(fixed.beta_d, 2.99929773928e-10) < 1e-7);
    const GammaFit pois = fit_gamma(with_num_re(64), InterferenceModel::poisson);
    CHECK(rel_err(pois.alpha_d, 1.6644398783) < 1e-7);
    CHECK(rel_err(pois.beta_d, 6.99836027926e-10) < 1e-7);
    const GammaFit cond =
        fit_gamma(with_num_re(64), InterferenceModel::poisson_conditioned);
    CHECK(rel_err(cond.alpha_d, 1.94613467) < 1e-7);
    CHECK(rel_err(cond.beta_d, 6.32921176e-10) < 1e-7);
}

TEST_CASE("SIR distribution") {
    const GammaFit fit = fit_gamma(with_num_re(64));
    const double p_o = kDefaults.p_o, p_i = kDefaults.p_i;
    CHECK(sir_cdf(0.0, fit, p_o, p_i) == 0.0);
    const BetaPrimeSIR sir = beta_prime_sir(fit, p_o, p_i);
    const double inf = std::numeric_limits<double>::infinity();
    const double mass = adaptive_quad([&](double x) { return sir.pdf(x); }, 0.0,
                                      inf, {1e-300, 1e-9, 4000});
    CHECK(std::fabs(mass - 1.0) < 1e-6);
    // CDF equals the integral of the PDF on a grid
    for (int i = 1; i <= 20; ++i) {
        const double x = sir.scale * std::pow(10.0, (i - 10.0) / 4.0);
        const double integral = adaptive_quad(
            [&](double v) { return sir.pdf(v); }, 0.0, x, {1e-300, 1e-9, 4000});
        INFO("x=" << x);
        CHECK(rel_err(sir.cdf(x), integral) < 1e-6);
    }
    // CDF is monotone and reaches 1
    double prev = 0.0;
    for (double x : {0.01, 0.1, 1.0, 10.0, 100.0, 1e4, 1e8}) {
        const double f = sir.cdf(x);
        CHECK(f >= prev);
        prev = f;
    }
    CHECK(sir.cdf(1e12) > 1.0 - 1e-6);
    // mean identity for alpha_d > 1
    const double mean = adaptive_quad([&](double x) { return x * sir.pdf(x); },
                                      0.0, inf, {1e-300, 1e-9, 4000});
    const double want = sir.scale * sir.alpha_n / (sir.alpha_d - 1.0);
    CHECK(rel_err(mean, want) < 1e-5);
}

TEST_CASE("coverage probability: frozen values and monotonicity") {
    SystemParams p = kDefaults;
    p.k_q = p.k_g = p.k_h = 1.0;
    p.num_re = 128;
    CHECK(rel_err(coverage_probability(1.0, p), 0.2350543017) < 1e-6); // oracle
    p.num_re = 256;
    CHECK(rel_err(coverage_probability(1.0, p), 0.7986232378) < 1e-6); // oracle

    // decreasing in the threshold
    double prev = 1.0;
    for (double db = -20.0; db <= 20.0; db += 5.0) {
        const double pc = coverage_probability(std::pow(10.0, db / 10.0), p);
        CHECK(pc <= prev);
        prev = pc;
    }
    // non-increasing in the HAP density
    prev = 1.0;
    for (double lam : {5e-6, 10e-6, 15e-6, 20e-6}) {
        SystemParams q = p;
        q.lambda_hap = lam;
        const double pc = coverage_probability(1.0, q);
        CHECK(pc <= prev);
        prev = pc;
    }
    // non-decreasing in blockage density at the dense-interferer settings
    SystemParams fig6 = p;
    fig6.lambda_hap = 15e-6;
    prev = 0.0;
    for (double lb : {0.5e-4, 1e-4, 2e-4, 3e-4}) {
        SystemParams q = fig6;
        q.lambda_b = lb;
        const double pc = coverage_probability(1.0, q);
        CHECK(pc >= prev);
        prev = pc;
    }
    // RIS-existence conditioning only scales by the defective mass
    CoverageOptions uncond;
    uncond.condition_ris_exists = false;
    CHECK(rel_err(coverage_probability(1.0, p, uncond),
                  coverage_probability(1.0, p) * wg_total_mass(p)) < 1e-12);
    CHECK_THROWS_AS(coverage_probability(0.0, p), std::domain_error);
}

TEST_CASE("coverage/capacity scale invariance in the powers") {
    SystemParams scaled = kDefaults;
    scaled.p_o *= 7.25;
    scaled.p_i *= 7.25;
    CHECK(rel_err(coverage_probability(1.0, scaled),
                  coverage_probability(1.0, kDefaults)) < 1e-12);
    CHECK(rel_err(ergodic_capacity(scaled).value,
                  ergodic_capacity(kDefaults).value) < 1e-12);
}

TEST_CASE("ergodic capacity: quadrature, closed form, trends") {
    // frozen oracle, L=64 defaults: quadrature and the closed form agree
    const CapacityResult c64 = ergodic_capacity(with_num_re(64));
    CHECK(rel_err(c64.value, 0.238744113424) < 1e-6); // oracle
    REQUIRE(c64.closed_form.has_value());
    CHECK(rel_err(*c64.closed_form, 0.238744113424) < 1e-6); // oracle
    CHECK(c64.closed_form_agrees());

    const CapacityResult c16 = ergodic_capacity(with_num_re(16));
    REQUIRE(c16.closed_form.has_value());
    CHECK(c16.closed_form_agrees());

    const CapacityResult p64 =
        ergodic_capacity(with_num_re(64), InterferenceModel::poisson);
    CHECK(rel_err(p64.value, 0.33708017078) < 1e-6); // oracle
    REQUIRE(p64.closed_form.has_value());
    CHECK(rel_err(*p64.closed_form, 0.33708017078) < 1e-6); // oracle

    // scale >= 1: the series representation is declared unusable
    const CapacityResult c256 = ergodic_capacity(with_num_re(256));
    CHECK(!c256.closed_form.has_value());
    CHECK(c256.value > 1.0);

    // integer alpha_d hits the csc pole guard
    CHECK(!detail::capacity_closed_form({2.0, 3.0, 0.5}).has_value());

    // more transmit power helps
    SystemParams strong = with_num_re(64);
    strong.p_o = 2.0;
    CHECK(ergodic_capacity(strong).value > c64.value);

    // capacity falls with RIS height
    double prev = std::numeric_limits<double>::infinity();
    for (double h : {25.0, 50.0, 100.0, 200.0}) {
        SystemParams q = with_num_re(128);
        q.h_ris = h;
        const double cap = ergodic_capacity(q).value;
        CHECK(cap <= prev);
        prev = cap;
    }
}

TEST_CASE("degenerate SIR concentrated at one gives one bit") {
    const BetaPrimeSIR nearly_point{1e4, 1e4, (1e4 - 1.0) / 1e4};
    const double cap = adaptive_quad(
        [&](double x) { return std::log2(1.0 + x) * nearly_point.pdf(x); }, 0.0,
        std::numeric_limits<double>::infinity(), {1e-300, 1e-9, 4000});
    CHECK(std::fabs(cap - 1.0) < 1e-2);
}
