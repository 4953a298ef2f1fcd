// SPDX-License-Identifier: Apache-2.0
//
// Globally adaptive Gauss-Kronrod (G7,K15) quadrature over finite or
// semi-infinite intervals. Worst-interval-first bisection; semi-infinite
// ranges go through the rational substitution x = lo + t/(1-t).

#pragma once

#include <cmath>
#include <limits>
#include <queue>
#include <vector>

#include "hapris/specfun.hpp"

namespace hapris {

struct QuadratureSpec {
    double abs_tol = 1e-12;
    double rel_tol = 1e-9;
    int max_subdivisions = 2000;
};

namespace detail {

// 15-point Kronrod nodes/weights with the embedded 7-point Gauss rule
// (QUADPACK dqk15 constants).
inline constexpr double kKronrodX[8] = {
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144838258730,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000};
inline constexpr double kKronrodW[8] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714};
inline constexpr double kGaussW[4] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327};

template <class F>
void kronrod15(F& f, double lo, double hi, double& value, double& error) {
    const double mid = 0.5 * (lo + hi);
    const double half = 0.5 * (hi - lo);
    const double f_mid = f(mid);
    double result_k = kKronrodW[7] * f_mid;
    double result_g = kGaussW[3] * f_mid;
    for (int j = 0; j < 7; ++j) {
        const double dx = half * kKronrodX[j];
        const double fsum = f(mid - dx) + f(mid + dx);
        result_k += kKronrodW[j] * fsum;
        if (j % 2 == 1) result_g += kGaussW[j / 2] * fsum;
    }
    value = result_k * half;
    error = std::fabs((result_k - result_g) * half);
}

struct QuadSegment {
    double lo, hi, value, error;
    bool operator<(const QuadSegment& o) const { return error < o.error; }
};

template <class F>
double adaptive_quad_finite(F& f, double lo, double hi,
                            const QuadratureSpec& spec) {
    std::priority_queue<QuadSegment> segments;
    QuadSegment seg{lo, hi, 0.0, 0.0};
    kronrod15(f, lo, hi, seg.value, seg.error);
    segments.push(seg);
    double total = seg.value;
    double total_err = seg.error;
    int splits = 0;
    while (splits < spec.max_subdivisions && !segments.empty()) {
        if (total_err <= std::max(spec.abs_tol, spec.rel_tol * std::fabs(total)))
            return total;
        QuadSegment worst = segments.top();
        segments.pop();
        const double mid = 0.5 * (worst.lo + worst.hi);
        if (!(worst.lo < mid && mid < worst.hi)) {
            // too narrow to split; drop from the queue, its error stays in
            // total_err as a permanent floor
            continue;
        }
        QuadSegment a{worst.lo, mid, 0.0, 0.0}, b{mid, worst.hi, 0.0, 0.0};
        kronrod15(f, a.lo, a.hi, a.value, a.error);
        kronrod15(f, b.lo, b.hi, b.value, b.error);
        total += a.value + b.value - worst.value;
        total_err += a.error + b.error - worst.error;
        segments.push(a);
        segments.push(b);
        ++splits;
    }
    if (std::isfinite(total) &&
        total_err <= std::max(spec.abs_tol, spec.rel_tol * std::fabs(total)))
        return total;
    if (!std::isfinite(total))
        throw AccuracyError("adaptive_quad: integrand produced non-finite values",
                            total);
    throw AccuracyError("adaptive_quad: subdivision budget exhausted", total);
}

} // namespace detail

/// Integrate f over (lo, hi); hi may be +infinity. Endpoint singularities are
/// tolerated as long as they are integrable (nodes are interior).
template <class F>
double adaptive_quad(F&& f, double lo, double hi,
                     const QuadratureSpec& spec = {}) {
    if (!std::isfinite(lo))
        throw std::domain_error("adaptive_quad: lower limit must be finite");
    if (hi <= lo && std::isfinite(hi)) {
        if (hi == lo) return 0.0;
        throw std::domain_error("adaptive_quad: requires hi > lo");
    }
    if (std::isfinite(hi)) {
        auto g = [&](double x) { return f(x); };
        return detail::adaptive_quad_finite(g, lo, hi, spec);
    }
    // x = lo + t/(1-t), dx = dt/(1-t)^2, t in (0,1)
    auto g = [&](double t) {
        const double omt = 1.0 - t;
        const double x = lo + t / omt;
        return f(x) / (omt * omt);
    };
    return detail::adaptive_quad_finite(g, 0.0, 1.0, spec);
}

} // namespace hapris
