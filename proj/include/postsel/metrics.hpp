#pragma once

#include <atomic>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <thread>
#include <vector>

#include "postsel/errors.hpp"
#include "postsel/procedures.hpp"
#include "postsel/regions.hpp"
#include "postsel/rng.hpp"

namespace postsel {

struct metrics_summary {
    double mean = 0.0;
    double std_err = 0.0;
    std::size_t reps = 0;
    std::string metric_label;
};

inline metrics_summary summarize(const std::vector<double>& values, std::string label) {
    if (values.empty()) throw invalid_config_error("summarize: no values");
    // Welford: exact for constant inputs, stable otherwise.
    double mean = 0.0, m2 = 0.0;
    std::size_t k = 0;
    for (double v : values) {
        ++k;
        const double d = v - mean;
        mean += d / static_cast<double>(k);
        m2 += d * (v - mean);
    }
    const double n = static_cast<double>(values.size());
    const double std_err = k > 1 ? std::sqrt(m2 / (n - 1.0)) / std::sqrt(n) : 0.0;
    return {mean, std_err, values.size(), std::move(label)};
}

/// False coverage proportion of a report against the true parameters:
/// miscovered entries over |S| v 1, 0 for an empty report.
inline double fcp(const procedure_report& report, const std::vector<double>& theta_true) {
    std::size_t miss = 0;
    for (const auto& entry : report.entries) {
        if (entry.index < 1 || entry.index > theta_true.size())
            throw invalid_config_error("fcp: entry index outside theta_true");
        if (!entry.region.covers(theta_true[entry.index - 1])) ++miss;
    }
    const std::size_t denom = std::max<std::size_t>(report.entries.size(), 1);
    return static_cast<double>(miss) / static_cast<double>(denom);
}

/// False discovery proportion: null rejections over |R|, 0 when R is empty.
inline double fdp(const std::vector<std::size_t>& rejected, const std::vector<bool>& is_null) {
    if (rejected.empty()) return 0.0;
    std::size_t bad = 0;
    for (std::size_t i : rejected) {
        if (i < 1 || i > is_null.size()) throw invalid_config_error("fdp: index outside [1..K]");
        if (is_null[i - 1]) ++bad;
    }
    return static_cast<double>(bad) / static_cast<double>(rejected.size());
}

/// Directional false discovery proportion: rejections whose declared sign is
/// wrong, over |R|. theta = 0 counts as an error for either direction.
inline double directional_fdp(const std::vector<std::size_t>& rejected,
                              const std::map<std::size_t, int>& directions,
                              const std::vector<double>& theta_true) {
    if (rejected.empty()) return 0.0;
    std::size_t bad = 0;
    for (std::size_t i : rejected) {
        if (i < 1 || i > theta_true.size())
            throw invalid_config_error("directional_fdp: index outside [1..K]");
        auto it = directions.find(i);
        if (it == directions.end())
            throw missing_direction_error("directional_fdp: rejected index has no direction");
        const double theta = theta_true[i - 1];
        if ((it->second == +1 && theta <= 0.0) || (it->second == -1 && theta >= 0.0)) ++bad;
    }
    return static_cast<double>(bad) / static_cast<double>(rejected.size());
}

/// Run `fn(rng, rep)` for rep = 0..reps-1, each replication on its own
/// deterministic substream (see substream_seed). Results land in replication
/// order regardless of thread count, so any reduction over the returned
/// vector is bit-reproducible.
template <class T, class Fn>
std::vector<T> replicate(std::size_t reps, std::uint64_t master_seed, unsigned threads, Fn&& fn) {
    std::vector<T> results(reps);
    unsigned workers = threads == 0 ? std::thread::hardware_concurrency() : threads;
    if (workers < 1) workers = 1;
    workers = static_cast<unsigned>(std::min<std::size_t>(workers, reps));
    if (workers <= 1) {
        for (std::size_t r = 0; r < reps; ++r) {
            rng_stream g(substream_seed(master_seed, r));
            results[r] = fn(g, r);
        }
        return results;
    }
    std::atomic<std::size_t> cursor{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&]() {
            for (;;) {
                const std::size_t r = cursor.fetch_add(1);
                if (r >= reps) return;
                rng_stream g(substream_seed(master_seed, r));
                results[r] = fn(g, r);
            }
        });
    }
    for (auto& th : pool) th.join();
    return results;
}

/// Monte-Carlo estimate of E[metric]: mean and std-error over `reps`
/// replications, each seeded from (master_seed, rep). Deterministic for a
/// fixed master seed across thread counts.
inline metrics_summary monte_carlo(const std::function<double(rng_stream&, std::size_t)>& metric_fn,
                                   std::size_t reps, std::uint64_t master_seed,
                                   unsigned threads = 1, std::string label = "metric") {
    if (reps < 2) throw invalid_config_error("monte_carlo: reps must be >= 2");
    auto values = replicate<double>(reps, master_seed, threads,
                                    [&](rng_stream& g, std::size_t r) { return metric_fn(g, r); });
    return summarize(values, std::move(label));
}

} // namespace postsel
