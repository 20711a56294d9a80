#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <string>
#include <utility>
#include <vector>

#include "postsel/errors.hpp"
#include "postsel/regions.hpp"

namespace postsel {

/// A family of e-values indexed by the parameter: theta -> E(theta) >= 0,
/// with E_theta[E(theta)] <= 1 under any distribution with parameter theta.
struct evalue_family {
    std::function<double(double)> evaluate;
};

/// Bracketing spec for inverting a quasi-convex e-value family into regions.
struct root_search {
    double bracket_lo;
    double bracket_hi;
    double tol = 1e-9;
    std::size_t max_iter = 200;
    std::size_t scan_points = 129;
};

namespace detail {

inline double bisect_crossing(const std::function<double(double)>& f, double at_or_above,
                              double below, double threshold, double tol, std::size_t max_iter) {
    // f(at_or_above) >= threshold, f(below) < threshold; returns the crossing.
    double a = at_or_above;
    double b = below;
    for (std::size_t it = 0; it < max_iter && std::fabs(b - a) > tol; ++it) {
        const double m = 0.5 * (a + b);
        if (f(m) < threshold)
            b = m;
        else
            a = m;
    }
    return 0.5 * (a + b);
}

} // namespace detail

/// Invert an e-value family into its region family
///   C(alpha) = { theta : E(theta) < 1/alpha },
/// an open interval located by grid scan plus bisection. The family must be
/// quasi-convex on the bracket (all constructors in this module are); a
/// noncontiguous sublevel set raises non_unimodal_error. A sublevel set that
/// touches a bracket edge is extended to infinity on that side, which keeps
/// the output conservative.
inline eci_family eci_from_evalue(evalue_family family, root_search search) {
    if (!family.evaluate) throw error("eci_from_evalue: empty e-value family");
    if (!(search.bracket_lo < search.bracket_hi) || search.scan_points < 3)
        throw invalid_config_error("eci_from_evalue: bad search spec");

    auto fn = [family, search](double alpha) -> confidence_region {
        if (alpha == 0.0) return confidence_region::full_space();
        const double threshold = 1.0 / alpha;
        const auto& ev = family.evaluate;

        const std::size_t m = search.scan_points;
        std::vector<double> grid(m);
        std::vector<bool> below(m);
        std::size_t first = m, last = m;
        bool contiguous = true;
        for (std::size_t i = 0; i < m; ++i) {
            grid[i] = search.bracket_lo +
                      (search.bracket_hi - search.bracket_lo) * static_cast<double>(i) /
                          static_cast<double>(m - 1);
            const double e = ev(grid[i]);
            if (e < 0.0 || std::isnan(e)) throw error("eci_from_evalue: e-value must be nonnegative");
            below[i] = e < threshold;
            if (below[i]) {
                if (first == m) first = i;
                else if (!below[i - 1]) contiguous = false;
                last = i;
            }
        }
        if (!contiguous)
            throw non_unimodal_error("eci_from_evalue: sublevel set is not an interval on the bracket");

        if (first == m) {
            // No grid point below threshold; a narrow sublevel set may hide
            // between grid points. Golden-section search for the minimum.
            double a = search.bracket_lo, b = search.bracket_hi;
            const double gr = 0.6180339887498949;
            double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
            double f1 = ev(x1), f2 = ev(x2);
            for (std::size_t it = 0; it < search.max_iter && (b - a) > search.tol; ++it) {
                if (f1 < f2) {
                    b = x2; x2 = x1; f2 = f1;
                    x1 = b - gr * (b - a); f1 = ev(x1);
                } else {
                    a = x1; x1 = x2; f1 = f2;
                    x2 = a + gr * (b - a); f2 = ev(x2);
                }
            }
            const double xm = 0.5 * (a + b);
            if (!(ev(xm) < threshold)) return confidence_region::empty_set();
            const double lo = detail::bisect_crossing(ev, search.bracket_lo, xm, threshold,
                                                      search.tol, search.max_iter);
            const double hi = detail::bisect_crossing(ev, search.bracket_hi, xm, threshold,
                                                      search.tol, search.max_iter);
            return confidence_region::interval(lo, hi, true, true);
        }

        double lo, hi;
        if (first == 0)
            lo = neg_inf;
        else
            lo = detail::bisect_crossing(ev, grid[first - 1], grid[first], threshold, search.tol,
                                         search.max_iter);
        if (last == m - 1)
            hi = pos_inf;
        else
            hi = detail::bisect_crossing(ev, grid[last + 1], grid[last], threshold, search.tol,
                                         search.max_iter);
        if (lo == neg_inf && hi == pos_inf) return confidence_region::full_space();
        return confidence_region::interval(lo, hi, true, true);
    };
    return eci_family(std::move(fn), eci_kind::from_evalue);
}

/// Sufficient statistics for batch Hoeffding constructions on data bounded
/// in [range_lo, range_hi]. The per-sample MGF bound scales with
/// (range_hi - range_lo)^2 / 8, which covers both the [0,1] and the [-1,1]
/// conventions with one formula.
struct hoeffding_batch_spec {
    double sample_mean;
    std::size_t n;
    double range_lo;
    double range_hi;

    void validate() const {
        if (n < 1) throw invalid_config_error("hoeffding spec: n must be >= 1");
        if (!(range_lo < range_hi) || std::isinf(range_lo) || std::isinf(range_hi) ||
            std::isnan(range_lo) || std::isnan(range_hi))
            throw invalid_config_error("hoeffding spec: need finite range_lo < range_hi");
        if (std::isnan(sample_mean) || sample_mean < range_lo || sample_mean > range_hi)
            throw invalid_config_error("hoeffding spec: sample_mean outside declared range");
    }

    double range() const { return range_hi - range_lo; }
};

namespace detail {

inline void check_open_level(double alpha, const char* who) {
    if (std::isnan(alpha) || alpha <= 0.0 || alpha >= 1.0)
        throw invalid_level_error(std::string(who) + ": level must lie in (0, 1)");
}

} // namespace detail

/// Two-sided batch Hoeffding e-value family with the fixed bet
/// lambda = sqrt(8 log(2/alpha')/n) / range, the value that makes the
/// resulting e-CI tightest at level alpha':
///   E(theta) = max(e^{+}, e^{-}) / 2,  e^{+-} = exp(+-n lambda (mean-theta) - n lambda^2 r^2/8).
inline evalue_family hoeffding_batch_evalue(const hoeffding_batch_spec& spec, double alpha_prime) {
    spec.validate();
    detail::check_open_level(alpha_prime, "hoeffding_batch_evalue");
    const double n = static_cast<double>(spec.n);
    const double r = spec.range();
    const double lambda = std::sqrt(8.0 * std::log(2.0 / alpha_prime) / n) / r;
    const double drift = n * lambda * lambda * r * r / 8.0;
    const double mean = spec.sample_mean;
    return evalue_family{[n, lambda, drift, mean](double theta) {
        const double s = n * lambda * (mean - theta);
        return 0.5 * std::max(std::exp(s - drift), std::exp(-s - drift));
    }};
}

/// Closed form of the generalized Hoeffding e-CI: with L = log(2/alpha) and
/// L' = log(2/alpha'), the region at level alpha is the open interval
///   mean +- r (L + L') / sqrt(8 n L').
/// At alpha = alpha' this collapses to the plain Hoeffding interval.
inline eci_family hoeffding_generalized_eci(const hoeffding_batch_spec& spec, double alpha_prime) {
    spec.validate();
    detail::check_open_level(alpha_prime, "hoeffding_generalized_eci");
    const double n = static_cast<double>(spec.n);
    const double r = spec.range();
    const double lprime = std::log(2.0 / alpha_prime);
    const double mean = spec.sample_mean;
    auto fn = [n, r, lprime, mean](double alpha) -> confidence_region {
        if (alpha == 0.0) return confidence_region::full_space();
        detail::check_open_level(alpha, "hoeffding_generalized_eci");
        const double l = std::log(2.0 / alpha);
        const double half = r * (l + lprime) / std::sqrt(8.0 * n * lprime);
        return confidence_region::interval(mean - half, mean + half, true, true);
    };
    return eci_family(std::move(fn), eci_kind::from_evalue);
}

/// Plain Hoeffding CI family: mean +- (r/2) sqrt(2 log(2/alpha)/n), the
/// per-level optimal inversion. Kind plain_ci: it is a CI family, not an
/// e-CI family.
inline eci_family hoeffding_plain_ci(const hoeffding_batch_spec& spec) {
    spec.validate();
    const double n = static_cast<double>(spec.n);
    const double r = spec.range();
    const double mean = spec.sample_mean;
    auto fn = [n, r, mean](double alpha) -> confidence_region {
        if (alpha == 0.0) return confidence_region::full_space();
        detail::check_open_level(alpha, "hoeffding_plain_ci");
        const double half = 0.5 * r * std::sqrt(2.0 * std::log(2.0 / alpha) / n);
        return confidence_region::interval(mean - half, mean + half, true, true);
    };
    return eci_family(std::move(fn), eci_kind::plain_ci);
}

/// Two-sided Hoeffding p-value for H0: mean = null_mean,
///   min(1, 2 exp(-2 n (mean - null)^2 / r^2)).
inline double hoeffding_pvalue(const hoeffding_batch_spec& spec, double null_mean) {
    spec.validate();
    const double n = static_cast<double>(spec.n);
    const double r = spec.range();
    const double d = spec.sample_mean - null_mean;
    return std::min(1.0, 2.0 * std::exp(-2.0 * n * d * d / (r * r)));
}

/// Running sums of a Hoeffding e-process over data in a declared bounded
/// range. A value type: cs_update returns the augmented copy, callers own
/// sequencing. The lambda schedule must be predictable (lambda_t may depend
/// only on observations before t); that contract is the caller's.
struct eprocess_state {
    std::size_t t = 0;
    double sum_lambda = 0.0;
    double sum_lambda_x = 0.0;
    double sum_lambda_sq = 0.0;
    double range_lo = 0.0;
    double range_hi = 1.0;
    std::string lambda_schedule = "custom";
};

inline eprocess_state make_eprocess_state(double range_lo = 0.0, double range_hi = 1.0,
                                          std::string schedule = "custom") {
    if (!(range_lo < range_hi) || std::isnan(range_lo) || std::isnan(range_hi))
        throw invalid_config_error("eprocess: need range_lo < range_hi");
    eprocess_state st;
    st.range_lo = range_lo;
    st.range_hi = range_hi;
    st.lambda_schedule = std::move(schedule);
    return st;
}

/// Default predictable schedule: the constant bet targeting n_target
/// observations at level alpha'.
inline double constant_cs_lambda(double alpha_prime, std::size_t n_target, double range_lo = 0.0,
                                 double range_hi = 1.0) {
    detail::check_open_level(alpha_prime, "constant_cs_lambda");
    if (n_target < 1) throw invalid_config_error("constant_cs_lambda: n_target must be >= 1");
    return std::sqrt(8.0 * std::log(2.0 / alpha_prime) / static_cast<double>(n_target)) /
           (range_hi - range_lo);
}

inline eprocess_state cs_update(eprocess_state state, double x, double lambda) {
    if (std::isnan(x) || x < state.range_lo || x > state.range_hi)
        throw out_of_range_error("cs_update: observation outside declared range");
    if (std::isnan(lambda) || std::isinf(lambda))
        throw invalid_config_error("cs_update: lambda must be finite");
    state.t += 1;
    state.sum_lambda += lambda;
    state.sum_lambda_x += lambda * x;
    state.sum_lambda_sq += lambda * lambda;
    return state;
}

enum class cs_side { plus, minus, two_sided };

/// Hoeffding e-process value at theta:
///   plus side  exp(sum lambda_i (x_i - theta) - (r^2/8) sum lambda_i^2),
///   minus side the same with -lambda, two_sided max of the halves.
/// At t = 0 the one-sided values are the empty product 1.
inline double cs_evalue(const eprocess_state& state, double theta, cs_side side) {
    const double r = state.range_hi - state.range_lo;
    const double drift = (r * r / 8.0) * state.sum_lambda_sq;
    const double s = state.sum_lambda_x - theta * state.sum_lambda;
    switch (side) {
    case cs_side::plus:
        return std::exp(s - drift);
    case cs_side::minus:
        return std::exp(-s - drift);
    case cs_side::two_sided:
        return 0.5 * std::max(std::exp(s - drift), std::exp(-s - drift));
    }
    return 0.0;
}

/// Confidence-sequence interval at time t: the open interval centered at the
/// lambda-weighted mean with half-width (log(2/alpha) + (r^2/8) sum lambda^2)
/// / sum lambda. FullSpace before any data.
inline confidence_region cs_interval(const eprocess_state& state, double alpha) {
    detail::check_open_level(alpha, "cs_interval");
    if (state.t == 0) return confidence_region::full_space();
    if (!(state.sum_lambda > 0.0))
        throw invalid_config_error("cs_interval: requires sum of lambdas > 0");
    const double r = state.range_hi - state.range_lo;
    const double center = state.sum_lambda_x / state.sum_lambda;
    const double half =
        (std::log(2.0 / alpha) + (r * r / 8.0) * state.sum_lambda_sq) / state.sum_lambda;
    return confidence_region::interval(center - half, center + half, true, true);
}

/// Split-likelihood e-value for a unit-variance Gaussian mean family:
/// the alternative is fit on d1 as N(mean(d1), 1), the null likelihood is
/// maximized at theta. Closed form
///   exp( n0 ((mean0 - theta)^2 - (mean0 - mean1)^2) / 2 ).
inline double ui_evalue_gaussian(const std::vector<double>& d0, const std::vector<double>& d1,
                                 double theta) {
    if (d0.empty() || d1.empty()) throw empty_split_error("ui_evalue_gaussian: empty data split");
    auto mean = [](const std::vector<double>& v) {
        double s = 0.0;
        for (double x : v) s += x;
        return s / static_cast<double>(v.size());
    };
    const double n0 = static_cast<double>(d0.size());
    const double mu0 = mean(d0);
    const double mu1 = mean(d1);
    const double a = mu0 - theta;
    const double b = mu0 - mu1;
    return std::exp(0.5 * n0 * (a * a - b * b));
}

inline evalue_family ui_gaussian_family(const std::vector<double>& d0,
                                        const std::vector<double>& d1) {
    if (d0.empty() || d1.empty()) throw empty_split_error("ui_gaussian_family: empty data split");
    double s0 = 0.0, s1 = 0.0;
    for (double x : d0) s0 += x;
    for (double x : d1) s1 += x;
    const double n0 = static_cast<double>(d0.size());
    const double mu0 = s0 / n0;
    const double mu1 = s1 / static_cast<double>(d1.size());
    return evalue_family{[n0, mu0, mu1](double theta) {
        const double a = mu0 - theta;
        const double b = mu0 - mu1;
        return std::exp(0.5 * n0 * (a * a - b * b));
    }};
}

/// Even split with the odd element assigned to the alternative half d1.
inline std::pair<std::vector<double>, std::vector<double>> ui_even_split(
    const std::vector<double>& data) {
    if (data.size() < 2) throw empty_split_error("ui_even_split: need at least 2 observations");
    const std::size_t n0 = data.size() / 2;
    std::vector<double> d0(data.begin(), data.begin() + static_cast<std::ptrdiff_t>(n0));
    std::vector<double> d1(data.begin() + static_cast<std::ptrdiff_t>(n0), data.end());
    return {std::move(d0), std::move(d1)};
}

/// Indicator e-CI from a hypothesis-test e-value: the complement of the null
/// interval when e exceeds 1/alpha strictly, the full space otherwise.
inline eci_family indicator_eci(double e, double null_lo, double null_hi) {
    if (std::isnan(e) || e < 0.0) throw error("indicator_eci: e-value must be nonnegative");
    if (!(null_lo <= null_hi)) throw invalid_region_error("indicator_eci: null_lo > null_hi");
    auto fn = [e, null_lo, null_hi](double alpha) -> confidence_region {
        if (alpha > 0.0 && e > 1.0 / alpha)
            return confidence_region::null_complement(null_lo, null_hi);
        return confidence_region::full_space();
    };
    return eci_family(std::move(fn), eci_kind::from_evalue);
}

/// Directional e-CI from a two-sided e-value pair with e_plus * e_minus = 1:
/// (-inf, 0) when the positive-side evidence clears 2/alpha, (0, inf) for the
/// negative side, else the full space.
inline eci_family directional_eci(double e_plus, double e_minus) {
    if (std::isnan(e_plus) || std::isnan(e_minus) || e_plus < 0.0 || e_minus < 0.0)
        throw error("directional_eci: e-values must be nonnegative");
    if (std::fabs(e_plus * e_minus - 1.0) > 1e-9)
        throw not_inverse_error("directional_eci: e_plus * e_minus must equal 1");
    auto fn = [e_plus, e_minus](double alpha) -> confidence_region {
        if (alpha > 0.0) {
            if (e_plus > 2.0 / alpha) return confidence_region::interval(neg_inf, 0.0, true, true);
            if (e_minus > 2.0 / alpha) return confidence_region::interval(0.0, pos_inf, true, true);
        }
        return confidence_region::full_space();
    };
    return eci_family(std::move(fn), eci_kind::from_evalue);
}

} // namespace postsel
