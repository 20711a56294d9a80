// Test-only oracles, kept independent of the implementation paths they
// check: exhaustive selection rules via threshold counting, quadrature, and
// a witness-based containment check.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "postsel/regions.hpp"

namespace oracles {

/// BH by direct counting: the largest k such that at least k p-values fall
/// at or below delta k / K (a different route than sorting).
inline std::size_t bh_k_bruteforce(const std::vector<double>& p, double delta) {
    const std::size_t K = p.size();
    std::size_t best = 0;
    for (std::size_t k = 1; k <= K; ++k) {
        std::size_t count = 0;
        for (double v : p)
            if (v <= delta * static_cast<double>(k) / static_cast<double>(K)) ++count;
        if (count >= k) best = k;
    }
    return best;
}

/// The BH rejection set via counting: everything at or below the threshold
/// delta k_BH / K.
inline std::vector<std::size_t> bh_set_bruteforce(const std::vector<double>& p, double delta) {
    const std::size_t k = bh_k_bruteforce(p, delta);
    std::vector<std::size_t> out;
    if (k == 0) return out;
    const double threshold = delta * static_cast<double>(k) / static_cast<double>(p.size());
    for (std::size_t i = 0; i < p.size(); ++i)
        if (p[i] <= threshold) out.push_back(i + 1);
    return out;
}

inline std::size_t ebh_k_bruteforce(const std::vector<double>& e, double delta) {
    const std::size_t K = e.size();
    std::size_t best = 0;
    for (std::size_t k = 1; k <= K; ++k) {
        std::size_t count = 0;
        for (double v : e)
            if (v >= static_cast<double>(K) / (delta * static_cast<double>(k))) ++count;
        if (count >= k) best = k;
    }
    return best;
}

inline std::vector<std::size_t> ebh_set_bruteforce(const std::vector<double>& e, double delta) {
    const std::size_t k = ebh_k_bruteforce(e, delta);
    std::vector<std::size_t> out;
    if (k == 0) return out;
    const double threshold = static_cast<double>(e.size()) / (delta * static_cast<double>(k));
    for (std::size_t i = 0; i < e.size(); ++i)
        if (e[i] >= threshold) out.push_back(i + 1);
    return out;
}

/// Adaptive Simpson quadrature.
inline double simpson(const std::function<double(double)>& f, double a, double b, double tol,
                      int depth = 24) {
    auto rule = [&](double lo, double hi) {
        return (hi - lo) / 6.0 * (f(lo) + 4.0 * f(0.5 * (lo + hi)) + f(hi));
    };
    std::function<double(double, double, double, double, int)> rec =
        [&](double lo, double hi, double whole, double eps, int d) -> double {
        const double mid = 0.5 * (lo + hi);
        const double left = rule(lo, mid), right = rule(mid, hi);
        if (d <= 0 || std::fabs(left + right - whole) < 15.0 * eps)
            return left + right + (left + right - whole) / 15.0;
        return rec(lo, mid, left, eps / 2.0, d - 1) + rec(mid, hi, right, eps / 2.0, d - 1);
    };
    return rec(a, b, rule(a, b), tol, depth);
}

/// Candidate witnesses for testing region containment: every endpoint of
/// both regions nudged in each direction, plus midpoints and far points.
/// Exact for the five piecewise variants, whose membership can only change
/// at endpoints.
inline std::vector<double> containment_witnesses(const postsel::confidence_region& a,
                                                 const postsel::confidence_region& b) {
    std::vector<double> pts;
    auto add = [&pts](double v) {
        if (std::isinf(v)) return;
        const double eps = 1e-9 * (1.0 + std::fabs(v));
        pts.push_back(v - eps);
        pts.push_back(v);
        pts.push_back(v + eps);
    };
    for (const auto& r : {a, b}) {
        add(r.lo());
        add(r.hi());
        if (!std::isinf(r.lo()) && !std::isinf(r.hi())) add(0.5 * (r.lo() + r.hi()));
    }
    pts.push_back(-1e12);
    pts.push_back(0.0);
    pts.push_back(1e12);
    return pts;
}

/// Ground-truth containment decided by the witness set.
inline bool contains_by_witness(const postsel::confidence_region& inner,
                                const postsel::confidence_region& outer) {
    for (double theta : containment_witnesses(inner, outer))
        if (inner.covers(theta) && !outer.covers(theta)) return false;
    return true;
}

} // namespace oracles
