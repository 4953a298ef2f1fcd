// SPDX-License-Identifier: Apache-2.0
//
// Scalar special-function kernels: log-gamma, upper incomplete gamma for any
// real order (including the scaled variant e^x * Gamma(a,x) needed when x is
// huge), Kummer 1F1, Gauss 2F1 with the usual linear transformations, and the
// regularized 2F1 / 3F2 series used by the closed-form capacity expression.
//
// All series use one stopping rule: quit once |term| <= 1e-16 * |sum| after at
// least 5 accumulated terms, give up after 10000 terms. Gamma-family kernels
// work in log space so that callers can combine astronomically large and small
// factors without overflow.

#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>

namespace hapris {

/// Iterative scheme ran out of budget; carries the best estimate so far.
class AccuracyError : public std::runtime_error {
public:
    AccuracyError(const std::string& what, double best_estimate)
        : std::runtime_error(what), best_(best_estimate) {}
    double best_estimate() const noexcept { return best_; }

private:
    double best_;
};

namespace detail {

inline constexpr int kMaxSeriesTerms = 10000;
inline constexpr int kMinSeriesTerms = 5;
inline constexpr double kSeriesEps = 1e-16;

inline bool is_nonpositive_integer(double x, double tol = 1e-12) {
    return x < 0.5 && std::fabs(x - std::round(x)) < tol;
}

} // namespace detail

inline double ln_gamma(double x) {
    if (!std::isfinite(x) || x <= 0.0)
        throw std::domain_error("ln_gamma: requires finite x > 0");
    return std::lgamma(x);
}

/// ln|Gamma(x)| for any non-pole x; sign of Gamma(x) returned via `sign`.
inline double ln_abs_gamma(double x, int& sign) {
    if (x > 0.0) {
        sign = 1;
        return std::lgamma(x);
    }
    if (detail::is_nonpositive_integer(x))
        throw std::domain_error("ln_abs_gamma: pole at non-positive integer");
    sign = (static_cast<long long>(std::floor(x)) % 2 == 0) ? 1 : -1;
    return std::lgamma(x); // lgamma returns ln|Gamma| for negative non-integers
}

/// 1/Gamma(x); entire in x (zero at the poles of Gamma).
inline double reciprocal_gamma(double x) {
    if (x > 0.0) return std::exp(-std::lgamma(x));
    if (detail::is_nonpositive_integer(x)) return 0.0;
    // reflection: 1/Gamma(x) = sin(pi x) Gamma(1-x) / pi
    return std::sin(std::numbers::pi * x) * std::exp(std::lgamma(1.0 - x)) /
           std::numbers::pi;
}

inline double ln_beta(double a, double b) {
    return ln_gamma(a) + ln_gamma(b) - ln_gamma(a + b);
}

namespace detail {

// Lentz continued fraction for x^{-a} e^{x} Gamma(a,x); converges for x > 0,
// any real a, fastest when x is not small.
inline double upper_gamma_cf(double a, double x) {
    constexpr double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / (b != 0.0 ? b : tiny);
    double h = d;
    for (int i = 1; i <= kMaxSeriesTerms; ++i) {
        const double an = -static_cast<double>(i) * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = c * d;
        h *= delta;
        if (std::fabs(delta - 1.0) < kSeriesEps && i >= kMinSeriesTerms)
            return h;
    }
    throw AccuracyError("upper_incomplete_gamma: continued fraction stalled", h);
}

// Regularized lower gamma P(a,x) by power series; a > 0, intended for x < a+1.
inline double lower_gamma_p_series(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    for (int n = 1; n <= kMaxSeriesTerms; ++n) {
        term *= x / (a + n);
        sum += term;
        if (std::fabs(term) < std::fabs(sum) * kSeriesEps && n >= kMinSeriesTerms)
            return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
    }
    throw AccuracyError("upper_incomplete_gamma: P series stalled",
                        sum * std::exp(-x + a * std::log(x) - std::lgamma(a)));
}

// Gamma(a,x) for a <= 0 and 0 < x < 1 by splitting the integral at 1:
//   Gamma(a,x) = Gamma(a,1) + sum_k (-1)^k/k! * I_k,
//   I_k = (1 - x^{a+k})/(a+k), or -ln(x) when a+k == 0.
inline double upper_gamma_small_x(double a, double x) {
    const double g1 = upper_gamma_cf(a, 1.0) * std::exp(-1.0);
    double sum = 0.0;
    double inv_kfact = 1.0; // (-1)^k / k!
    for (int k = 0; k <= kMaxSeriesTerms; ++k) {
        if (k > 0) inv_kfact /= -static_cast<double>(k);
        const double ak = a + k;
        const double ik = (std::fabs(ak) < 1e-12)
                              ? -std::log(x)
                              : (1.0 - std::pow(x, ak)) / ak;
        const double term = inv_kfact * ik;
        sum += term;
        if (std::fabs(term) < (std::fabs(sum + g1) + 1e-300) * kSeriesEps &&
            k >= kMinSeriesTerms)
            break;
    }
    return g1 + sum;
}

// Core dispatch; returns e^x * Gamma(a,x) if scaled, else Gamma(a,x).
inline double upper_gamma_impl(double a, double x, bool scaled) {
    if (!std::isfinite(a) || !std::isfinite(x) || x < 0.0)
        throw std::domain_error("upper_incomplete_gamma: requires finite x >= 0");
    if (x == 0.0) {
        if (a > 0.0) return std::exp(std::lgamma(a));
        throw std::domain_error("upper_incomplete_gamma: diverges at x = 0 for a <= 0");
    }
    if (a > 0.0 && x < a + 1.0) {
        const double q = 1.0 - lower_gamma_p_series(a, x);
        // x < a+1 < 180 before Gamma(a) itself overflows, so e^x is safe
        return q * std::exp(std::lgamma(a) + (scaled ? x : 0.0));
    }
    if (a <= 0.0 && x < 1.0) {
        const double g = upper_gamma_small_x(a, x);
        return scaled ? g * std::exp(x) : g;
    }
    const double cf = upper_gamma_cf(a, x);
    return cf * std::exp(a * std::log(x) - (scaled ? 0.0 : x));
}

} // namespace detail

/// Upper incomplete gamma Gamma(a,x); a may be <= 0 as long as x > 0.
inline double upper_incomplete_gamma(double a, double x) {
    return detail::upper_gamma_impl(a, x, /*scaled=*/false);
}

/// e^x * Gamma(a,x). Use this when x is large enough that Gamma(a,x)
/// underflows but the caller multiplies by e^x anyway.
inline double exp_scaled_upper_gamma(double a, double x) {
    return detail::upper_gamma_impl(a, x, /*scaled=*/true);
}

/// ln M(a,b,z) for a, b > 0 and z >= 0 (all-positive series; for large z the
/// e^z z^{a-b} asymptotic keeps the result representable in log space).
inline double ln_hyp1f1(double a, double b, double z) {
    if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(z) ||
        a <= 0.0 || b <= 0.0 || z < 0.0)
        throw std::domain_error("ln_hyp1f1: requires a, b > 0 and z >= 0");
    if (z == 0.0) return 0.0;
    if (z <= 300.0) {
        double term = 1.0, sum = 1.0;
        for (int k = 0; k < detail::kMaxSeriesTerms; ++k) {
            term *= (a + k) * z / ((b + k) * (k + 1.0));
            sum += term;
            if (term < sum * detail::kSeriesEps &&
                k + 1 >= detail::kMinSeriesTerms)
                return std::log(sum);
        }
        throw AccuracyError("ln_hyp1f1: series stalled", std::log(sum));
    }
    // DLMF 13.7.1: M(a,b,z) ~ Gamma(b)/Gamma(a) e^z z^{a-b}
    //                          sum_k (b-a)_k (1-a)_k / (k! z^k)
    double term = 1.0, sum = 1.0, prev = std::numeric_limits<double>::max();
    for (int k = 0; k < 40; ++k) {
        term *= (b - a + k) * (1.0 - a + k) / ((k + 1.0) * z);
        if (std::fabs(term) >= prev) break; // asymptotic tail started growing
        prev = std::fabs(term);
        sum += term;
        if (std::fabs(term) < std::fabs(sum) * detail::kSeriesEps) break;
    }
    return std::lgamma(b) - std::lgamma(a) + z + (a - b) * std::log(z) +
           std::log(sum);
}

/// Kummer confluent hypergeometric M(a,b,z).
inline double hyp1f1(double a, double b, double z) {
    if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(z))
        throw std::domain_error("hyp1f1: non-finite argument");
    if (detail::is_nonpositive_integer(b))
        throw std::domain_error("hyp1f1: b is a non-positive integer");
    if (z == 0.0) return 1.0;
    if (z < 0.0) return std::exp(z) * hyp1f1(b - a, b, -z); // Kummer transform
    if (a > 0.0 && b > 0.0 && z > 300.0) return std::exp(ln_hyp1f1(a, b, z));
    double term = 1.0, sum = 1.0;
    for (int k = 0; k < detail::kMaxSeriesTerms; ++k) {
        term *= (a + k) * z / ((b + k) * (k + 1.0));
        if (term == 0.0) return sum; // polynomial case terminated
        sum += term;
        if (std::fabs(term) < std::fabs(sum) * detail::kSeriesEps &&
            k + 1 >= detail::kMinSeriesTerms)
            return sum;
    }
    throw AccuracyError("hyp1f1: series stalled", sum);
}

namespace detail {

inline double hyp2f1_series(double a, double b, double c, double z) {
    double term = 1.0, sum = 1.0;
    for (int k = 0; k < kMaxSeriesTerms; ++k) {
        term *= (a + k) * (b + k) / (c + k) * z / (k + 1.0);
        if (term == 0.0) return sum;
        sum += term;
        if (std::fabs(term) < std::fabs(sum) * kSeriesEps &&
            k + 1 >= kMinSeriesTerms)
            return sum;
    }
    throw AccuracyError("hyp2f1: series stalled", sum);
}

} // namespace detail

/// Gauss hypergeometric 2F1(a,b;c;z) for real arguments, z < 1.
inline double hyp2f1(double a, double b, double c, double z) {
    using detail::is_nonpositive_integer;
    if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c) ||
        !std::isfinite(z))
        throw std::domain_error("hyp2f1: non-finite argument");
    if (z >= 1.0) throw std::domain_error("hyp2f1: requires z < 1");

    const bool a_poly = is_nonpositive_integer(a);
    const bool b_poly = is_nonpositive_integer(b);
    if (is_nonpositive_integer(c) &&
        !((a_poly && a > c - 0.5) || (b_poly && b > c - 0.5)))
        throw std::domain_error("hyp2f1: c is a non-positive integer");
    if (z == 0.0 || a == 0.0 || b == 0.0) return 1.0;
    if (a_poly || b_poly) return detail::hyp2f1_series(a, b, c, z);
    if (z < 0.0) // Pfaff: maps z < 0 into (0,1)
        return std::pow(1.0 - z, -a) * hyp2f1(a, c - b, c, z / (z - 1.0));

    const auto positive_form = [&]() {
        // Euler transform when it converts an alternating series into a
        // positive-term one (the coverage CDF lands here with b < 0).
        if ((a < 0.0 || b < 0.0) && c - a > 0.0 && c - b > 0.0)
            return std::pow(1.0 - z, c - a - b) *
                   detail::hyp2f1_series(c - a, c - b, c, z);
        return detail::hyp2f1_series(a, b, c, z);
    };

    if (z <= 0.75) return positive_form();

    // z in (0.75, 1): linear transformation to argument 1-z (DLMF 15.8.4),
    // unusable when c-a-b is (near-)integer -- fall back to the direct series.
    const double d = c - a - b;
    if (std::fabs(d - std::round(d)) < 1e-6) return positive_form();

    // signed log of Gamma(c)Gamma(p)/(Gamma(q)Gamma(r))
    const auto gamma_ratio = [&](double p, double q, double r, int& sign) {
        int s1 = 1, s2 = 1, s3 = 1, s4 = 1;
        const double lg = ln_abs_gamma(c, s1) + ln_abs_gamma(p, s2) -
                          ln_abs_gamma(q, s3) - ln_abs_gamma(r, s4);
        sign = s1 * s2 * s3 * s4;
        return lg;
    };
    double term1 = 0.0;
    if (!is_nonpositive_integer(c - a) && !is_nonpositive_integer(c - b)) {
        int sg = 1;
        const double lg = gamma_ratio(d, c - a, c - b, sg);
        term1 = sg * std::exp(lg) *
                detail::hyp2f1_series(a, b, a + b - c + 1.0, 1.0 - z);
    }
    int sg = 1;
    const double lg = gamma_ratio(-d, a, b, sg);
    const double term2 = sg * std::exp(lg + d * std::log1p(-z)) *
                         detail::hyp2f1_series(c - a, c - b, d + 1.0, 1.0 - z);
    return term1 + term2;
}

/// Regularized 2F1(a,b;c;z)/Gamma(c), entire in c. Returns nullopt instead of
/// a wrong value when the series does not apply (|z| >= 1) or stalls.
inline std::optional<double> hyp2f1_regularized(double a, double b, double c,
                                                double z) {
    if (!std::isfinite(a) || !std::isfinite(b) || !std::isfinite(c) ||
        !std::isfinite(z) || std::fabs(z) >= 1.0)
        return std::nullopt;
    double poch = 1.0; // (a)_k (b)_k z^k / k!
    double sum = reciprocal_gamma(c);
    for (int k = 0; k < detail::kMaxSeriesTerms; ++k) {
        poch *= (a + k) * (b + k) * z / (k + 1.0);
        if (!std::isfinite(poch)) return std::nullopt;
        const double term = poch * reciprocal_gamma(c + k + 1.0);
        sum += term;
        if (poch == 0.0) return sum; // terminated polynomial
        // only trust the stop test once past any Gamma poles in c+k
        if (c + k + 1.0 > 0.5 &&
            std::fabs(term) < std::fabs(sum) * detail::kSeriesEps &&
            k + 1 >= detail::kMinSeriesTerms)
            return sum;
    }
    return std::nullopt;
}

/// Regularized 3F2(a1,a2,a3;b1,b2;z)/(Gamma(b1)Gamma(b2)), entire in b1,b2.
inline std::optional<double> hyp3f2_regularized(double a1, double a2, double a3,
                                                double b1, double b2, double z) {
    if (!std::isfinite(a1) || !std::isfinite(a2) || !std::isfinite(a3) ||
        !std::isfinite(b1) || !std::isfinite(b2) || !std::isfinite(z) ||
        std::fabs(z) >= 1.0)
        return std::nullopt;
    double poch = 1.0; // (a1)_k (a2)_k (a3)_k z^k / k!
    double sum = reciprocal_gamma(b1) * reciprocal_gamma(b2);
    for (int k = 0; k < detail::kMaxSeriesTerms; ++k) {
        poch *= (a1 + k) * (a2 + k) * (a3 + k) * z / (k + 1.0);
        if (!std::isfinite(poch)) return std::nullopt;
        const double term =
            poch * reciprocal_gamma(b1 + k + 1.0) * reciprocal_gamma(b2 + k + 1.0);
        sum += term;
        if (poch == 0.0) return sum;
        if (b1 + k + 1.0 > 0.5 && b2 + k + 1.0 > 0.5 &&
            std::fabs(term) < std::fabs(sum) * detail::kSeriesEps &&
            k + 1 >= detail::kMinSeriesTerms)
            return sum;
    }
    return std::nullopt;
}

} // namespace hapris
