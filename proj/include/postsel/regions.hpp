#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <limits>
#include <utility>
#include <vector>

#include "postsel/errors.hpp"

namespace postsel {

inline constexpr double pos_inf = std::numeric_limits<double>::infinity();
inline constexpr double neg_inf = -std::numeric_limits<double>::infinity();

enum class region_kind { interval, half_line_above, full_space, empty_set, null_complement };

/// A confidence region over a one-dimensional real parameter. One of five
/// variants: an interval with tracked endpoint openness, an open/closed
/// half-line (lo, inf), the full space, the empty set, or the complement of
/// a closed null interval [null_lo, null_hi]. Immutable after construction.
class confidence_region {
public:
    static confidence_region interval(double lo, double hi, bool lo_open = true, bool hi_open = true) {
        check_finite_or_inf(lo);
        check_finite_or_inf(hi);
        if (!(lo <= hi)) throw invalid_region_error("interval requires lo <= hi");
        if (lo == hi && (lo_open || hi_open))
            throw invalid_region_error("degenerate interval must be closed at both ends");
        confidence_region r;
        r.kind_ = region_kind::interval;
        r.lo_ = lo;
        r.hi_ = hi;
        r.lo_open_ = std::isinf(lo) ? true : lo_open;
        r.hi_open_ = std::isinf(hi) ? true : hi_open;
        return r;
    }

    static confidence_region half_line_above(double lo, bool lo_open = true) {
        check_finite_or_inf(lo);
        confidence_region r;
        r.kind_ = region_kind::half_line_above;
        r.lo_ = lo;
        r.hi_ = pos_inf;
        r.lo_open_ = std::isinf(lo) ? true : lo_open;
        r.hi_open_ = true;
        return r;
    }

    static confidence_region full_space() {
        confidence_region r;
        r.kind_ = region_kind::full_space;
        r.lo_ = neg_inf;
        r.hi_ = pos_inf;
        return r;
    }

    static confidence_region empty_set() {
        confidence_region r;
        r.kind_ = region_kind::empty_set;
        r.lo_ = 0.0;
        r.hi_ = 0.0;
        return r;
    }

    /// Theta minus the closed interval [null_lo, null_hi].
    static confidence_region null_complement(double null_lo, double null_hi) {
        check_finite_or_inf(null_lo);
        check_finite_or_inf(null_hi);
        if (!(null_lo <= null_hi)) throw invalid_region_error("null_complement requires null_lo <= null_hi");
        confidence_region r;
        r.kind_ = region_kind::null_complement;
        r.lo_ = null_lo;
        r.hi_ = null_hi;
        return r;
    }

    region_kind kind() const { return kind_; }
    double lo() const { return lo_; }
    double hi() const { return hi_; }
    bool lo_open() const { return lo_open_; }
    bool hi_open() const { return hi_open_; }

    bool covers(double theta) const {
        switch (kind_) {
        case region_kind::full_space:
            return true;
        case region_kind::empty_set:
            return false;
        case region_kind::half_line_above:
            return lo_open_ ? theta > lo_ : theta >= lo_;
        case region_kind::null_complement:
            return !(theta >= lo_ && theta <= hi_);
        case region_kind::interval:
            return (lo_open_ ? theta > lo_ : theta >= lo_) && (hi_open_ ? theta < hi_ : theta <= hi_);
        }
        return false;
    }

    /// Lebesgue length: hi - lo for intervals, +inf for any unbounded
    /// variant, 0 for the empty set.
    double width() const {
        switch (kind_) {
        case region_kind::empty_set:
            return 0.0;
        case region_kind::interval:
            return hi_ - lo_;
        default:
            return pos_inf;
        }
    }

private:
    confidence_region() = default;

    static void check_finite_or_inf(double v) {
        if (std::isnan(v)) throw invalid_region_error("region endpoint is NaN");
    }

    region_kind kind_ = region_kind::empty_set;
    double lo_ = 0.0;
    double hi_ = 0.0;
    bool lo_open_ = true;
    bool hi_open_ = true;
};

inline bool covers(const confidence_region& region, double theta) { return region.covers(theta); }
inline double width(const confidence_region& region) { return region.width(); }

namespace detail {

/// Nonempty maximal interval of a region's normal form.
struct region_piece {
    double lo;
    double hi;
    bool lo_open;
    bool hi_open;
};

/// Canonical decomposition into at most two disjoint pieces separated by a
/// nonempty closed gap. Infinite endpoints are always open.
inline std::vector<region_piece> region_pieces(const confidence_region& r) {
    std::vector<region_piece> out;
    switch (r.kind()) {
    case region_kind::empty_set:
        break;
    case region_kind::full_space:
        out.push_back({neg_inf, pos_inf, true, true});
        break;
    case region_kind::interval:
        out.push_back({r.lo(), r.hi(), r.lo_open(), r.hi_open()});
        break;
    case region_kind::half_line_above:
        out.push_back({r.lo(), pos_inf, r.lo_open(), true});
        break;
    case region_kind::null_complement:
        if (r.lo() > neg_inf) out.push_back({neg_inf, r.lo(), true, true});
        if (r.hi() < pos_inf) out.push_back({r.hi(), pos_inf, true, true});
        break;
    }
    return out;
}

inline bool piece_subset(const region_piece& a, const region_piece& b) {
    const bool lo_ok = b.lo < a.lo || (b.lo == a.lo && (a.lo_open || !b.lo_open));
    const bool hi_ok = b.hi > a.hi || (b.hi == a.hi && (a.hi_open || !b.hi_open));
    return lo_ok && hi_ok;
}

} // namespace detail

/// Point-set containment inner \subseteq outer. Exact for the five variants:
/// each piece of `inner` must fit inside a single piece of `outer` (outer
/// pieces are separated by nonempty closed gaps, so no piece can straddle).
inline bool contains_region(const confidence_region& inner, const confidence_region& outer) {
    const auto in = detail::region_pieces(inner);
    const auto out = detail::region_pieces(outer);
    for (const auto& p : in) {
        bool placed = false;
        for (const auto& q : out) {
            if (detail::piece_subset(p, q)) {
                placed = true;
                break;
            }
        }
        if (!placed) return false;
    }
    return true;
}

/// Point-set equality up to `tol` on finite endpoints. With tol = 0 the
/// comparison is exact. Openness flags must match exactly in either case;
/// infinite endpoints must match as infinities.
inline bool region_equal(const confidence_region& a, const confidence_region& b, double tol = 0.0) {
    const auto pa = detail::region_pieces(a);
    const auto pb = detail::region_pieces(b);
    if (pa.size() != pb.size()) return false;
    auto close = [tol](double x, double y) {
        if (std::isinf(x) || std::isinf(y)) return x == y;
        return std::fabs(x - y) <= tol;
    };
    for (std::size_t i = 0; i < pa.size(); ++i) {
        if (!close(pa[i].lo, pb[i].lo) || !close(pa[i].hi, pb[i].hi)) return false;
        if (pa[i].lo_open != pb[i].lo_open || pa[i].hi_open != pb[i].hi_open) return false;
    }
    return true;
}

enum class eci_kind { from_evalue, calibrated, plain_ci };

/// A family of confidence regions indexed by the error level alpha in [0,1).
/// Families constructed in this library are nonincreasing in alpha. `kind`
/// records provenance: e-value inversion, calibration of an ordinary CI
/// family, or a plain CI family (which the e-BY procedure must reject).
class eci_family {
public:
    using eval_fn = std::function<confidence_region(double)>;

    eci_family() = default;
    eci_family(eval_fn fn, eci_kind kind) : fn_(std::move(fn)), kind_(kind) {}

    confidence_region evaluate(double alpha) const {
        if (!fn_) throw error("eci_family: empty family");
        if (std::isnan(alpha) || alpha < 0.0 || alpha >= 1.0)
            throw invalid_level_error("eci_family: alpha must lie in [0, 1)");
        return fn_(alpha);
    }

    eci_kind kind() const { return kind_; }
    bool valid() const { return static_cast<bool>(fn_); }

private:
    eval_fn fn_;
    eci_kind kind_ = eci_kind::plain_ci;
};

/// Grid check of the family monotonicity invariant:
/// alpha1 <= alpha2  =>  evaluate(alpha2) \subseteq evaluate(alpha1).
/// Containment is transitive, so consecutive pairs of the sorted grid cover
/// every pair.
inline bool is_monotone_on_grid(const eci_family& family, std::vector<double> alphas) {
    std::sort(alphas.begin(), alphas.end());
    for (std::size_t i = 0; i + 1 < alphas.size(); ++i) {
        if (!contains_region(family.evaluate(alphas[i + 1]), family.evaluate(alphas[i])))
            return false;
    }
    return true;
}

} // namespace postsel
