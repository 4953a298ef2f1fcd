// SPDX-License-Identifier: Apache-2.0
//
// Rician fading: magnitude sampling and closed-form fractional moments.
// Normalization: sigma2 = E[|X|^2] exactly.

#pragma once

#include <cmath>
#include <random>
#include <stdexcept>

#include "hapris/geometry.hpp"
#include "hapris/specfun.hpp"

namespace hapris {

struct RicianSpec {
    double k = 1.0;      // LoS-to-scatter power ratio, linear
    double sigma2 = 1.0; // mean-square magnitude
};

/// E[|X|^t] = sigma^t Gamma(1+t/2) e^{-K} (K+1)^{-t/2} 1F1(1+t/2; 1; K).
inline double rician_moment(const RicianSpec& spec, double t) {
    if (t < 0.0) throw std::domain_error("rician_moment: requires t >= 0");
    if (spec.k < 0.0 || spec.sigma2 <= 0.0)
        throw std::domain_error("rician_moment: invalid RicianSpec");
    if (t == 0.0) return 1.0;
    // evaluated fully in log space: the e^{-K} prefactor and the e^{K}
    // asymptotic growth of 1F1 cancel exactly for large K
    const double log_pre = 0.5 * t * std::log(spec.sigma2) +
                           ln_gamma(1.0 + 0.5 * t) - spec.k -
                           0.5 * t * std::log1p(spec.k);
    return std::exp(log_pre + ln_hyp1f1(1.0 + 0.5 * t, 1.0, spec.k));
}

/// |X| for X complex Gaussian with mean amplitude sqrt(sigma2 K/(K+1)) and
/// scatter variance sigma2/(K+1).
inline double sample_rician(const RicianSpec& spec, Rng& rng) {
    if (spec.k < 0.0 || spec.sigma2 <= 0.0)
        throw std::domain_error("sample_rician: invalid RicianSpec");
    const double nu = std::sqrt(spec.sigma2 * spec.k / (spec.k + 1.0));
    const double sd = std::sqrt(spec.sigma2 / (2.0 * (spec.k + 1.0)));
    std::normal_distribution<double> normal(0.0, 1.0);
    const double re = nu + sd * normal(rng);
    const double im = sd * normal(rng);
    return std::hypot(re, im);
}

} // namespace hapris
