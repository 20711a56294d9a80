#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <utility>

#include "postsel/errors.hpp"
#include "postsel/procedures.hpp"
#include "postsel/regions.hpp"

namespace postsel {

/// A p-to-e calibrator: nonincreasing f on [0,1] with integral at most 1,
/// together with its dual f_dual(x) = sup{ p : f(p) >= x }.
struct calibrator {
    std::function<double(double)> f;
    std::function<double(double)> f_dual;
    std::string label;
};

/// Grid spec for the dual p-value search.
struct pdual_grid {
    std::size_t levels = 512;
    double alpha_min = 1e-9;
    double tol = 1e-9;
};

/// Dual p-value of a nonincreasing region family at theta:
///   inf { alpha : theta not in C(alpha) },
/// 1 when theta is covered at every probed level. Log-spaced grid scan for
/// the first excluding level, refined by bisection on the monotone
/// exclusion indicator.
inline double p_dual(const eci_family& ci, double theta, pdual_grid grid = {}) {
    if (grid.levels < 2) throw invalid_config_error("p_dual: need at least 2 grid levels");
    auto excluded = [&](double alpha) { return !ci.evaluate(alpha).covers(theta); };

    const double alpha_max = 1.0 - 1e-12;
    if (!excluded(alpha_max)) return 1.0;

    // Find the smallest grid level that excludes theta.
    const double log_lo = std::log(grid.alpha_min);
    const double log_hi = std::log(alpha_max);
    double covered_at = 0.0;
    double excluded_at = alpha_max;
    bool found_covered = false;
    for (std::size_t g = 0; g < grid.levels; ++g) {
        const double alpha = std::exp(log_lo + (log_hi - log_lo) * static_cast<double>(g) /
                                                   static_cast<double>(grid.levels - 1));
        if (excluded(alpha)) {
            excluded_at = alpha;
            break;
        }
        covered_at = alpha;
        found_covered = true;
    }
    if (!found_covered) {
        // Excluded even at the smallest grid level; probe down to alpha = 0.
        if (!excluded(0.0)) covered_at = 0.0;
        else return 0.0;
    }
    double lo = covered_at, hi = excluded_at;
    while (hi - lo > grid.tol) {
        const double mid = 0.5 * (lo + hi);
        if (excluded(mid))
            hi = mid;
        else
            lo = mid;
    }
    return hi;
}

/// The e-value-like dual t(theta) = sup{ 1/alpha : theta not in C(alpha) }
/// with sup over the empty set equal to 1; computed as 1 / p_dual, +inf when
/// theta is excluded at arbitrarily small levels.
inline double t_dual(const eci_family& ci, double theta) {
    const double p = p_dual(ci, theta);
    if (p <= 0.0) return pos_inf;
    return 1.0 / p;
}

namespace detail {

/// Domain guard for calibrator inputs; tolerates float round-off at the
/// edges of [0, 1].
inline double check_unit_interval(double p) {
    if (std::isnan(p) || p < -1e-12 || p > 1.0 + 1e-12)
        throw invalid_config_error("calibrator: p must lie in [0, 1]");
    return std::clamp(p, 0.0, 1.0);
}

} // namespace detail

/// Power calibrator f(p) = kappa p^{kappa-1}, integral exactly 1; dual
/// f_dual(x) = (x/kappa)^{1/(kappa-1)} clamped to [0, 1].
inline calibrator power_calibrator(double kappa) {
    if (std::isnan(kappa) || kappa <= 0.0 || kappa >= 1.0)
        throw invalid_kappa_error("power_calibrator: kappa must lie in (0, 1)");
    calibrator c;
    c.label = "power(" + std::to_string(kappa) + ")";
    c.f = [kappa](double p_in) {
        const double p = detail::check_unit_interval(p_in);
        if (p == 0.0) return pos_inf;
        return kappa * std::pow(p, kappa - 1.0);
    };
    c.f_dual = [kappa](double x) {
        if (std::isnan(x)) throw invalid_config_error("calibrator dual: NaN input");
        if (x <= kappa) return 1.0;
        if (std::isinf(x)) return 0.0;
        return std::pow(x / kappa, 1.0 / (kappa - 1.0));
    };
    return c;
}

/// Step calibrator that embeds the dependence-penalized BY correction in the
/// e-BY procedure: K steps of width delta/(K l_K) with values K/(delta k),
/// k in [K], then 0 (the K-step sum integrates to exactly 1). f(0) = K/delta.
/// Its dual satisfies f_dual(K/(delta j)) = delta j / (K l_K) for j in [K].
inline calibrator by_calibrator(double delta, std::size_t K) {
    detail::check_delta(delta, "by_calibrator");
    if (K < 1) throw invalid_config_error("by_calibrator: K must be >= 1");
    const double ell = harmonic(K);
    const double kd = static_cast<double>(K);
    calibrator c;
    c.label = "by(" + std::to_string(delta) + "," + std::to_string(K) + ")";
    c.f = [delta, K, ell, kd](double x_in) {
        const double x = detail::check_unit_interval(x_in);
        if (x == 0.0) return kd / delta;
        const double step = std::ceil(kd * ell * x / delta);
        if (step > static_cast<double>(K)) return 0.0;
        return kd / (delta * std::max(step, 1.0));
    };
    c.f_dual = [delta, K, ell, kd](double x) {
        if (std::isnan(x)) throw invalid_config_error("calibrator dual: NaN input");
        if (x <= 0.0) return 1.0;
        if (std::isinf(x) || x > kd / delta) return 0.0;
        // Largest j in [K] with K/(delta j) >= x; the tiny relative nudge
        // keeps exact boundary inputs (x = K/(delta j) computed in floating
        // point) on the intended step.
        double j = std::floor(kd / (delta * x) * (1.0 + 1e-12));
        j = std::min(j, static_cast<double>(K));
        if (j < 1.0) return 0.0;
        return delta * j / (kd * ell);
    };
    return c;
}

/// Calibrate an ordinary CI family into an e-CI family:
/// C_cal(alpha) = C(f_dual(1/alpha)). The result inverts the implicit
/// e-value family f(p_dual(theta)).
inline eci_family calibrate_ci(const eci_family& ci, const calibrator& cal) {
    if (!ci.valid()) throw error("calibrate_ci: empty family");
    if (!cal.f || !cal.f_dual) throw invalid_config_error("calibrate_ci: incomplete calibrator");
    auto dual = cal.f_dual;
    auto base = ci;
    auto fn = [base, dual](double alpha) -> confidence_region {
        const double x = alpha <= 0.0 ? pos_inf : 1.0 / alpha;
        double p = dual(x);
        p = std::clamp(p, 0.0, std::nextafter(1.0, 0.0));
        return base.evaluate(p);
    };
    return eci_family(std::move(fn), eci_kind::calibrated);
}

} // namespace postsel
