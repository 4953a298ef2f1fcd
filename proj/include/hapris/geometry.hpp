// SPDX-License-Identifier: Apache-2.0
//
// Spatial model: Poisson fields of HAPs and RISs on a disc around the user,
// a Boolean field of rectangular blockages, the two visibility mechanisms
// (analytic Bernoulli thinning vs. explicit segment/rectangle tests on the
// ground projection), and the three link-distance densities.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace hapris {

using Rng = std::mt19937_64;

/// 64-bit mix used to derive independent per-trial RNG substreams.
inline std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ull;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

inline Rng make_rng(std::uint64_t seed, std::uint64_t stream = 0) {
    return Rng(splitmix64(splitmix64(seed) ^ (stream + 1)));
}

struct Vec2 {
    double x = 0.0;
    double y = 0.0;
    double norm() const { return std::hypot(x, y); }
};

struct DerivedBlockage {
    double zeta = 0.0; // 1/m
    double rho = 0.0;  // dimensionless
};

/// Rectangle with center, side lengths and orientation (radians).
struct Rect {
    Vec2 center;
    double len = 0.0;
    double wid = 0.0;
    double theta = 0.0;
};

struct SystemParams {
    double lambda_hap = 5e-6;  // HAP density, 1/m^2
    double lambda_ris = 50e-6; // RIS density, 1/m^2
    double lambda_b = 100e-6;  // blockage density, 1/m^2
    double h_hap = 50e3;       // HAP altitude, m
    double h_ris = 50.0;       // RIS height, m
    double mean_len = 25.0;    // mean blockage length, m
    double mean_wid = 25.0;    // mean blockage width, m
    int num_re = 64;           // reflecting elements per RIS
    double k_q = 1.0, k_g = 1.0, k_h = 1.0;             // Rician K (linear)
    double sigma2_q = 1.0, sigma2_g = 1.0, sigma2_h = 1.0; // E[|fading|^2]
    double eps_q = 2.0, eps_g = 2.0, eps_h = 2.0;       // path-loss exponents
    double p_o = 1.0, p_i = 1.0;                        // powers, W
    double window_radius = 0.0; // analysis/simulation disc, m; 0 = 10/zeta

    DerivedBlockage blockage() const {
        return {2.0 * lambda_b * (mean_len + mean_wid) / std::numbers::pi,
                lambda_b * mean_len * mean_wid};
    }

    double window() const {
        if (window_radius > 0.0) return window_radius;
        return 10.0 / blockage().zeta;
    }

    void validate() const {
        const auto require = [](bool ok, const char* what) {
            if (!ok) throw std::domain_error(std::string("SystemParams: ") + what);
        };
        require(lambda_hap > 0, "lambda_hap must be > 0");
        require(lambda_ris > 0, "lambda_ris must be > 0");
        require(lambda_b > 0, "lambda_b must be > 0");
        require(h_hap > 0, "h_hap must be > 0");
        require(h_ris > 0, "h_ris must be > 0");
        require(mean_len > 0, "mean_len must be > 0");
        require(mean_wid > 0, "mean_wid must be > 0");
        require(num_re >= 1, "num_re must be >= 1");
        require(k_q >= 0 && k_g >= 0 && k_h >= 0, "K factors must be >= 0");
        require(sigma2_q > 0 && sigma2_g > 0 && sigma2_h > 0,
                "sigma2 values must be > 0");
        require(eps_q >= 2 && eps_g >= 2 && eps_h >= 2,
                "path-loss exponents must be >= 2");
        require(p_o > 0 && p_i > 0, "powers must be > 0");
        const auto db = blockage();
        // support condition for the visible-HAP distance density
        require(window() >= std::sqrt(2.0 * std::exp(-db.rho)) / db.zeta,
                "window_radius below the visible-HAP density support bound");
    }
};

/// One sampled scene around a user at the origin.
struct NetworkRealization {
    std::vector<Vec2> haps;
    std::vector<Vec2> riss;
    std::vector<Rect> rects;
    std::vector<std::uint8_t> hap_visible;
    std::vector<std::uint8_t> ris_visible;
};

enum class VisibilityMode { thinning, explicit_rects };

/// Homogeneous PPP on a disc of the given radius centred at the origin.
inline std::vector<Vec2> sample_ppp(double density, double radius, Rng& rng) {
    if (density <= 0.0 || radius < 0.0)
        throw std::domain_error("sample_ppp: requires density > 0, radius >= 0");
    if (radius == 0.0) return {};
    std::poisson_distribution<int> count(density * std::numbers::pi * radius *
                                         radius);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int n = count(rng);
    std::vector<Vec2> points;
    points.reserve(n);
    for (int i = 0; i < n; ++i) {
        const double r = radius * std::sqrt(unit(rng));
        const double phi = 2.0 * std::numbers::pi * unit(rng);
        points.push_back({r * std::cos(phi), r * std::sin(phi)});
    }
    return points;
}

/// Boolean blockage field: PPP centres, Uniform(0, 2*mean) sides, uniform
/// orientation in (0, 2*pi].
inline std::vector<Rect> sample_blockages(const SystemParams& params,
                                          double radius, Rng& rng) {
    if (radius < 0.0) throw std::domain_error("sample_blockages: radius >= 0");
    if (radius == 0.0) return {};
    std::poisson_distribution<int> count(params.lambda_b * std::numbers::pi *
                                         radius * radius);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int n = count(rng);
    std::vector<Rect> rects;
    rects.reserve(n);
    for (int i = 0; i < n; ++i) {
        Rect r;
        const double rad = radius * std::sqrt(unit(rng));
        const double phi = 2.0 * std::numbers::pi * unit(rng);
        r.center = {rad * std::cos(phi), rad * std::sin(phi)};
        r.len = 2.0 * params.mean_len * unit(rng);
        r.wid = 2.0 * params.mean_wid * unit(rng);
        r.theta = 2.0 * std::numbers::pi * (1.0 - unit(rng)); // in (0, 2*pi]
        rects.push_back(r);
    }
    return rects;
}

/// P(link of horizontal length w_h is unobstructed) = exp(-(zeta w_h + rho)).
inline double p_los(double w_h, const DerivedBlockage& db) {
    if (!(w_h >= 0.0))
        throw std::domain_error("p_los: requires w_h >= 0");
    return std::exp(-(db.zeta * w_h + db.rho));
}

/// Mean number of HAPs visible to the user: 2 pi lambda exp(-rho) / zeta^2.
inline double mean_visible_haps(const SystemParams& params) {
    const auto db = params.blockage();
    if (db.zeta <= 0.0)
        throw std::domain_error(
            "mean_visible_haps: diverges as blockage density vanishes");
    return 2.0 * std::numbers::pi * params.lambda_hap * std::exp(-db.rho) /
           (db.zeta * db.zeta);
}

/// True if segment a->b crosses the rectangle (Liang-Barsky in rect frame).
inline bool segment_intersects_rect(const Vec2& a, const Vec2& b,
                                    const Rect& r) {
    const double c = std::cos(r.theta), s = std::sin(r.theta);
    const auto to_local = [&](const Vec2& p) -> Vec2 {
        const double dx = p.x - r.center.x, dy = p.y - r.center.y;
        return {c * dx + s * dy, -s * dx + c * dy};
    };
    const Vec2 p0 = to_local(a), p1 = to_local(b);
    const double dx = p1.x - p0.x, dy = p1.y - p0.y;
    const double hx = 0.5 * r.len, hy = 0.5 * r.wid;
    double t0 = 0.0, t1 = 1.0;
    const auto clip = [&](double p, double q) { // keep p*t <= q
        if (p == 0.0) return q >= 0.0;
        const double t = q / p;
        if (p < 0.0) {
            if (t > t1) return false;
            if (t > t0) t0 = t;
        } else {
            if (t < t0) return false;
            if (t < t1) t1 = t;
        }
        return true;
    };
    return clip(-dx, p0.x + hx) && clip(dx, hx - p0.x) &&
           clip(-dy, p0.y + hy) && clip(dy, hy - p0.y);
}

/// Explicit visibility: the ground projection of the link crosses no
/// rectangle. Buildings are treated as tall enough to block anything whose
/// projection they intersect.
inline bool visible_explicit(const Vec2& observer, const Vec2& point_foot,
                             std::span<const Rect> rects) {
    for (const Rect& r : rects)
        if (segment_intersects_rect(observer, point_foot, r)) return false;
    return true;
}

/// Thinning visibility: Bernoulli draw with the analytic LoS probability.
inline bool visible_thinning(double horizontal_dist, const DerivedBlockage& db,
                             Rng& rng) {
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    return unit(rng) < p_los(horizontal_dist, db);
}

namespace detail {

// 1 - (1+x) e^{-x}, stable for small x (direct form cancels below x ~ 1e-8)
inline double truncated_kernel_mass(double x) {
    if (x > 0.01)
        return 1.0 - (x + 1.0) * std::exp(-x);
    // series: sum_{k>=2} (-1)^k x^k (k-1)/k!
    return x * x *
           (0.5 + x * (-1.0 / 3.0 + x * (0.125 + x * (-1.0 / 30.0))));
}

inline double wg_u(double w, const DerivedBlockage& db) {
    return std::exp(-db.rho) / (db.zeta * db.zeta) *
           truncated_kernel_mass(db.zeta * w);
}

} // namespace detail

/// Density of the horizontal distance to a visible HAP, supported on
/// [0, window].
inline double pdf_whlos(double w_h, const SystemParams& params) {
    const double omega = params.window();
    if (w_h < 0.0 || w_h > omega) return 0.0;
    const auto db = params.blockage();
    const double norm = detail::truncated_kernel_mass(db.zeta * omega);
    return db.zeta * db.zeta * w_h * std::exp(-db.zeta * w_h) / norm;
}

/// Density of the horizontal distance to the nearest *visible* RIS.
/// Defective: integrates to less than one (no visible RIS may exist).
inline double pdf_wg(double w_g, const SystemParams& params) {
    if (w_g < 0.0) return 0.0;
    const auto db = params.blockage();
    const double u = detail::wg_u(w_g, db);
    return 2.0 * std::numbers::pi * params.lambda_ris * w_g *
           std::exp(-(db.zeta * w_g + db.rho +
                      2.0 * std::numbers::pi * params.lambda_ris * u));
}

/// Total mass of pdf_wg: P(at least one visible RIS exists).
inline double wg_total_mass(const SystemParams& params) {
    const auto db = params.blockage();
    const double u_inf = std::exp(-db.rho) / (db.zeta * db.zeta);
    return -std::expm1(-2.0 * std::numbers::pi * params.lambda_ris * u_inf);
}

/// Rayleigh density of the horizontal distance to the nearest HAP.
inline double pdf_wq(double w_q, const SystemParams& params) {
    if (w_q < 0.0) return 0.0;
    return 2.0 * std::numbers::pi * params.lambda_hap * w_q *
           std::exp(-std::numbers::pi * params.lambda_hap * w_q * w_q);
}

/// Inverse-CDF sampler for pdf_wg on a tabulated grid; nullopt marks the
/// defective mass (no visible RIS in sight).
class WgSampler {
public:
    explicit WgSampler(const SystemParams& params, int grid_points = 8192)
        : mass_(wg_total_mass(params)) {
        const double w_max = params.window();
        grid_.resize(grid_points + 1);
        cdf_.resize(grid_points + 1);
        grid_[0] = 0.0;
        cdf_[0] = 0.0;
        double prev_pdf = pdf_wg(0.0, params);
        const double dw = w_max / grid_points;
        for (int i = 1; i <= grid_points; ++i) {
            grid_[i] = i * dw;
            const double p = pdf_wg(grid_[i], params);
            cdf_[i] = cdf_[i - 1] + 0.5 * (prev_pdf + p) * dw;
            prev_pdf = p;
        }
    }

    std::optional<double> operator()(Rng& rng) const {
        std::uniform_real_distribution<double> unit(0.0, 1.0);
        const double u = unit(rng);
        if (u >= mass_) return std::nullopt;
        const double target = std::min(u, cdf_.back());
        auto it = std::lower_bound(cdf_.begin(), cdf_.end(), target);
        const std::size_t hi = std::min<std::size_t>(
            std::max<std::size_t>(1, it - cdf_.begin()), cdf_.size() - 1);
        const double c0 = cdf_[hi - 1], c1 = cdf_[hi];
        const double f = (c1 > c0) ? (target - c0) / (c1 - c0) : 0.0;
        return grid_[hi - 1] + f * (grid_[hi] - grid_[hi - 1]);
    }

    double total_mass() const { return mass_; }

private:
    std::vector<double> grid_, cdf_;
    double mass_;
};

} // namespace hapris
