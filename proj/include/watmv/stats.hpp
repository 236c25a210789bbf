#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "watmv/interp.hpp"

namespace watmv {

inline double median_of(std::vector<double> v) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    size_t mid = v.size() / 2;
    return v.size() % 2 == 1 ? v[mid] : (v[mid - 1] + v[mid]) / 2.0;
}

// Sample standard deviation; 0 for fewer than two samples.
inline double stddev_of(std::span<const double> v) {
    if (v.size() < 2) return 0.0;
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double acc = 0.0;
    for (double x : v) acc += (x - mean) * (x - mean);
    return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

struct MannWhitneyResult {
    double u = 0.0;  // min(U1, U2)
    double p = 1.0;  // two-sided
};

// Rank-sum U with midrank tie handling; p from the normal approximation with
// tie-corrected variance and a continuity correction. Identical samples on
// both sides have zero variance and give p = 1 by convention.
inline MannWhitneyResult mann_whitney_u(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw std::invalid_argument("mann_whitney_u: empty sample");
    const size_t n1 = a.size(), n2 = b.size(), n = n1 + n2;
    std::vector<std::pair<double, int>> all;
    all.reserve(n);
    for (double x : a) all.emplace_back(x, 0);
    for (double x : b) all.emplace_back(x, 1);
    std::sort(all.begin(), all.end(),
              [](const auto& l, const auto& r) { return l.first < r.first; });

    double rank_sum_a = 0.0;
    double tie_term = 0.0;
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j < n && all[j].first == all[i].first) ++j;
        double t = static_cast<double>(j - i);
        double midrank = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
        for (size_t k = i; k < j; ++k)
            if (all[k].second == 0) rank_sum_a += midrank;
        tie_term += t * t * t - t;
        i = j;
    }

    double u1 = rank_sum_a - static_cast<double>(n1) * (static_cast<double>(n1) + 1.0) / 2.0;
    double u2 = static_cast<double>(n1) * static_cast<double>(n2) - u1;
    MannWhitneyResult res;
    res.u = std::min(u1, u2);
    double mu = static_cast<double>(n1) * static_cast<double>(n2) / 2.0;
    double var = static_cast<double>(n1) * static_cast<double>(n2) / 12.0 *
                 (static_cast<double>(n) + 1.0 -
                  tie_term / (static_cast<double>(n) * (static_cast<double>(n) - 1.0)));
    if (var <= 0.0) {
        res.p = 1.0;  // all values identical across both samples
        return res;
    }
    double z = (std::abs(res.u - mu) - 0.5) / std::sqrt(var);
    if (z < 0.0) z = 0.0;
    res.p = std::erfc(z / std::sqrt(2.0));
    if (res.p > 1.0) res.p = 1.0;
    return res;
}

// Fuel distribution of repeated executions, with per-trace-hash subgroups
// for the variant-indistinguishability analysis.
struct TimingStats {
    double median = 0.0;
    double sigma = 0.0;
    std::vector<double> samples;  // fuel per run, in run order

    struct Group {
        std::string hash;
        std::vector<double> fuels;
        double median = 0.0;
        double sigma = 0.0;
    };
    std::vector<Group> groups;  // sorted by hash
};

namespace detail {

inline TimingStats collect_timing(const Module& m, const std::string& endpoint,
                                  const std::vector<uint32_t>& input, size_t runs,
                                  uint64_t seed) {
    TimingStats stats;
    Instance inst(m, HostConfig{seed, 50'000'000, 10'000});
    std::map<std::string, std::vector<double>> groups;
    for (size_t r = 0; r < runs; ++r) {
        inst.reset_memory();
        Outcome out = inst.invoke(endpoint, input);
        double fuel = static_cast<double>(out.trace.fuel_used);
        stats.samples.push_back(fuel);
        if (out.ok()) groups[hash_trace(out.trace).digest].push_back(fuel);
    }
    stats.median = median_of(stats.samples);
    stats.sigma = stddev_of(stats.samples);
    for (auto& [hash, fuels] : groups) {
        TimingStats::Group g;
        g.hash = hash;
        g.median = median_of(fuels);
        g.sigma = stddev_of(fuels);
        g.fuels = std::move(fuels);
        stats.groups.push_back(std::move(g));
    }
    return stats;
}

} // namespace detail

// Original vs multivariant fuel distributions over `runs` executions each.
// The multivariant instance keeps one RNG stream across runs, so its
// dispatchers keep drawing; a dispatcher-free module is fully deterministic
// and reports sigma = 0.
inline std::pair<TimingStats, TimingStats> timing_distributions(
    const Module& original, const Module& multivariant, size_t runs, uint64_t seed,
    const std::string& endpoint, const std::vector<uint32_t>& input) {
    return {detail::collect_timing(original, endpoint, input, runs, seed),
            detail::collect_timing(multivariant, endpoint, input, runs, seed)};
}

} // namespace watmv
