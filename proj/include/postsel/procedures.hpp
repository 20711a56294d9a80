#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "postsel/errors.hpp"
#include "postsel/regions.hpp"

namespace postsel {

/// K-th harmonic number, summed smallest term first.
inline double harmonic(std::size_t K) {
    if (K < 1) throw invalid_config_error("harmonic: K must be >= 1");
    double s = 0.0;
    for (std::size_t k = K; k >= 1; --k) s += 1.0 / static_cast<double>(k);
    return s;
}

/// The selected index set (1-based indices in [1..K]), plus the optional
/// per-index R_i^min oracle attached by selection rules that know it (BH and
/// e-BH attach |S|). Rules without a known oracle leave it absent and
/// by_independent falls back to the Bonferroni-safe R_i^min = 1.
struct selection_outcome {
    std::vector<std::size_t> selected;
    std::optional<std::map<std::size_t, std::size_t>> r_min;
    std::string rule_label;
};

struct report_entry {
    std::size_t index;
    double alpha;
    confidence_region region;
};

/// Per-selected-index corrected levels and reported regions; the unit on
/// which the false coverage proportion is computed.
struct procedure_report {
    std::vector<report_entry> entries;
    std::string procedure_label;
    double delta = 0.0;
    std::size_t K = 0;
};

/// Nonnegative weights over the K parameters, summing to at most K.
struct weight_vector {
    std::vector<double> w;

    void validate(std::size_t K) const {
        if (w.size() != K) throw invalid_config_error("weight_vector: needs exactly K weights");
        double sum = 0.0;
        for (double wi : w) {
            if (std::isnan(wi) || wi < 0.0)
                throw invalid_config_error("weight_vector: weights must be nonnegative");
            sum += wi;
        }
        if (sum > static_cast<double>(K) * (1.0 + 1e-12))
            throw weight_sum_error("weight_vector: weights must sum to at most K");
    }
};

namespace detail {

inline void check_delta(double delta, const char* who) {
    if (std::isnan(delta) || delta <= 0.0 || delta >= 1.0)
        throw invalid_level_error(std::string(who) + ": delta must lie in (0, 1)");
}

inline void check_selection(const selection_outcome& sel, std::size_t K, const char* who) {
    for (std::size_t i : sel.selected)
        if (i < 1 || i > K) throw invalid_config_error(std::string(who) + ": index outside [1..K]");
    if (sel.r_min) {
        for (std::size_t i : sel.selected) {
            auto it = sel.r_min->find(i);
            if (it != sel.r_min->end() &&
                (it->second < 1 || it->second > std::max<std::size_t>(sel.selected.size(), 1)))
                throw invalid_config_error(std::string(who) + ": r_min outside [1, |S|]");
        }
    }
}

inline void require_ecis(const std::vector<eci_family>& families, const selection_outcome& sel,
                         const char* who) {
    for (std::size_t i : sel.selected)
        if (families[i - 1].kind() == eci_kind::plain_ci)
            throw not_an_eci_error(std::string(who) +
                                   ": selected family is a plain CI, not an e-CI");
}

} // namespace detail

/// e-BY: report each selected region at the single corrected level
/// alpha_i = delta |S| / K. Valid for any selection rule and any dependence,
/// but only on e-CI families.
inline procedure_report e_by(const std::vector<eci_family>& ecis, const selection_outcome& sel,
                             double delta, std::size_t K) {
    detail::check_delta(delta, "e_by");
    if (ecis.size() != K) throw invalid_config_error("e_by: needs exactly K families");
    detail::check_selection(sel, K, "e_by");
    detail::require_ecis(ecis, sel, "e_by");
    procedure_report report{{}, "e_by", delta, K};
    const std::size_t s = sel.selected.size();
    if (s == 0) return report;
    const double alpha = delta * static_cast<double>(s) / static_cast<double>(K);
    for (std::size_t i : sel.selected)
        report.entries.push_back({i, alpha, ecis[i - 1].evaluate(alpha)});
    return report;
}

/// Weighted e-BY: alpha_i = w_i delta |S| / K, weights summing to at most K.
inline procedure_report weighted_e_by(const std::vector<eci_family>& ecis,
                                      const selection_outcome& sel, double delta, std::size_t K,
                                      const weight_vector& weights) {
    detail::check_delta(delta, "weighted_e_by");
    if (ecis.size() != K) throw invalid_config_error("weighted_e_by: needs exactly K families");
    weights.validate(K);
    detail::check_selection(sel, K, "weighted_e_by");
    detail::require_ecis(ecis, sel, "weighted_e_by");
    procedure_report report{{}, "weighted_e_by", delta, K};
    const std::size_t s = sel.selected.size();
    if (s == 0) return report;
    for (std::size_t i : sel.selected) {
        const double alpha = std::min(
            1.0 - 1e-12, weights.w[i - 1] * delta * static_cast<double>(s) / static_cast<double>(K));
        report.entries.push_back({i, alpha, ecis[i - 1].evaluate(alpha)});
    }
    return report;
}

/// BY under independence / PRDS (caller-asserted): alpha_i = delta R_i^min / K.
/// Without an R_i^min oracle the conservative fallback R_i^min = 1 applies
/// and the report label carries a warning suffix.
inline procedure_report by_independent(const std::vector<eci_family>& cis,
                                       const selection_outcome& sel, double delta, std::size_t K) {
    detail::check_delta(delta, "by_independent");
    if (cis.size() != K) throw invalid_config_error("by_independent: needs exactly K families");
    detail::check_selection(sel, K, "by_independent");
    procedure_report report{{}, "by_independent", delta, K};
    const bool have_rmin = sel.r_min.has_value();
    if (!have_rmin) report.procedure_label += "(rmin_fallback=1)";
    for (std::size_t i : sel.selected) {
        std::size_t rm = 1;
        if (have_rmin) {
            auto it = sel.r_min->find(i);
            rm = it == sel.r_min->end() ? 1 : it->second;
        }
        const double alpha = delta * static_cast<double>(rm) / static_cast<double>(K);
        report.entries.push_back({i, alpha, cis[i - 1].evaluate(alpha)});
    }
    return report;
}

/// BY under arbitrary dependence: alpha_i = delta |S| / (K l_K) with the
/// harmonic-number penalty.
inline procedure_report by_dependent(const std::vector<eci_family>& cis,
                                     const selection_outcome& sel, double delta, std::size_t K) {
    detail::check_delta(delta, "by_dependent");
    if (cis.size() != K) throw invalid_config_error("by_dependent: needs exactly K families");
    detail::check_selection(sel, K, "by_dependent");
    procedure_report report{{}, "by_dependent", delta, K};
    const std::size_t s = sel.selected.size();
    if (s == 0) return report;
    const double ell = harmonic(K);
    const double alpha =
        delta * static_cast<double>(s) / (static_cast<double>(K) * ell);
    for (std::size_t i : sel.selected)
        report.entries.push_back({i, alpha, cis[i - 1].evaluate(alpha)});
    return report;
}

namespace detail {

inline void check_probs(const std::vector<double>& p, const char* who) {
    for (double v : p)
        if (std::isnan(v) || v < 0.0 || v > 1.0)
            throw invalid_config_error(std::string(who) + ": p-values must lie in [0, 1]");
}

} // namespace detail

/// Select every index with p_i strictly below delta. No R_i^min oracle: the
/// rule's minimum selected-set size under coordinate perturbations has no
/// closed form under BY semantics.
inline selection_outcome p_threshold_select(const std::vector<double>& pvalues, double delta) {
    detail::check_delta(delta, "p_threshold_select");
    detail::check_probs(pvalues, "p_threshold_select");
    selection_outcome out;
    out.rule_label = "p_threshold";
    for (std::size_t i = 0; i < pvalues.size(); ++i)
        if (pvalues[i] < delta) out.selected.push_back(i + 1);
    return out;
}

/// Benjamini-Hochberg step-up: with p-values ordered smallest to largest,
/// k_BH = max{k : P_(k) <= delta k / K} (0 if none), selecting the k_BH
/// smallest. Ties resolve to the lower index. Attaches R_i^min = |S|.
inline selection_outcome bh_select(const std::vector<double>& pvalues, double delta) {
    detail::check_delta(delta, "bh_select");
    detail::check_probs(pvalues, "bh_select");
    const std::size_t K = pvalues.size();
    std::vector<std::size_t> order(K);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return pvalues[a] < pvalues[b]; });
    std::size_t k_bh = 0;
    for (std::size_t k = 1; k <= K; ++k) {
        if (pvalues[order[k - 1]] <= delta * static_cast<double>(k) / static_cast<double>(K))
            k_bh = k;
    }
    selection_outcome out;
    out.rule_label = "bh";
    for (std::size_t j = 0; j < k_bh; ++j) out.selected.push_back(order[j] + 1);
    std::sort(out.selected.begin(), out.selected.end());
    out.r_min.emplace();
    for (std::size_t i : out.selected) (*out.r_min)[i] = k_bh;
    return out;
}

/// e-BH: with e-values ordered largest to smallest,
/// k_EBH = max{k : E_(k) >= K/(delta k)} (0 if none), selecting the k_EBH
/// largest. Ties resolve to the lower index. Attaches R_i^min = |S|.
inline selection_outcome e_bh_select(const std::vector<double>& evalues, double delta) {
    detail::check_delta(delta, "e_bh_select");
    for (double e : evalues)
        if (std::isnan(e) || e < 0.0)
            throw invalid_config_error("e_bh_select: e-values must be nonnegative");
    const std::size_t K = evalues.size();
    std::vector<std::size_t> order(K);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return evalues[a] > evalues[b]; });
    std::size_t k_ebh = 0;
    for (std::size_t k = 1; k <= K; ++k) {
        if (evalues[order[k - 1]] >= static_cast<double>(K) / (delta * static_cast<double>(k)))
            k_ebh = k;
    }
    selection_outcome out;
    out.rule_label = "e_bh";
    for (std::size_t j = 0; j < k_ebh; ++j) out.selected.push_back(order[j] + 1);
    std::sort(out.selected.begin(), out.selected.end());
    out.r_min.emplace();
    for (std::size_t i : out.selected) (*out.r_min)[i] = k_ebh;
    return out;
}

struct directional_selection {
    selection_outcome outcome;
    /// Direction D_i in {+1, -1} for each selected index.
    std::map<std::size_t, int> directions;
};

/// e-BH on the combined two-sided e-values max(e+, e-)/2, assigning
/// direction -1 when the positive-side e-value clears the rejection
/// threshold K/(delta k_EBH) and +1 otherwise.
inline directional_selection directional_e_bh(const std::vector<double>& e_plus,
                                              const std::vector<double>& e_minus, double delta) {
    detail::check_delta(delta, "directional_e_bh");
    if (e_plus.size() != e_minus.size())
        throw invalid_config_error("directional_e_bh: e_plus and e_minus sizes differ");
    const std::size_t K = e_plus.size();
    std::vector<double> combined(K);
    for (std::size_t i = 0; i < K; ++i) {
        if (e_plus[i] < 0.0 || e_minus[i] < 0.0 || std::isnan(e_plus[i]) || std::isnan(e_minus[i]))
            throw invalid_config_error("directional_e_bh: e-values must be nonnegative");
        if (std::fabs(e_plus[i] * e_minus[i] - 1.0) > 1e-9)
            throw not_inverse_error("directional_e_bh: e_plus * e_minus must equal 1");
        combined[i] = 0.5 * std::max(e_plus[i], e_minus[i]);
    }
    directional_selection out;
    out.outcome = e_bh_select(combined, delta);
    out.outcome.rule_label = "directional_e_bh";
    const std::size_t k = out.outcome.selected.size();
    if (k == 0) return out;
    const double threshold = static_cast<double>(K) / (delta * static_cast<double>(k));
    for (std::size_t i : out.outcome.selected)
        out.directions[i] = e_plus[i - 1] >= threshold ? -1 : +1;
    return out;
}

} // namespace postsel
