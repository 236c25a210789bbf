#pragma once

#include <cmath>
#include <map>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "watmv/interp.hpp"
#include "watmv/rng.hpp"

namespace watmv {

struct FleetConfig {
    uint32_t nodes = 64;
    uint32_t queries = 100;  // per node, all with the identical input
    uint64_t master_seed = 1;
    std::string endpoint;
    std::vector<uint32_t> input;
    uint64_t fuel_limit = 50'000'000;
    uint32_t call_depth_limit = 10'000;
};

struct QueryRecord {
    std::string hash;  // empty on failure
    uint64_t fuel = 0;
    std::optional<uint32_t> result;
    Trap trap = Trap::None;

    bool failed() const { return trap != Trap::None; }
};

// Hash grid of one fleet run: per_node[n][q]. Failures stay in the grid so
// metric denominators remain explicit, but are excluded from hash sets.
struct TraceCorpus {
    uint32_t nodes = 0;
    uint32_t queries = 0;
    std::vector<std::vector<QueryRecord>> per_node;

    size_t failures() const {
        size_t n = 0;
        for (const auto& row : per_node)
            for (const auto& r : row) n += r.failed() ? 1 : 0;
        return n;
    }

    std::vector<std::string> node_hashes(size_t n) const {
        std::vector<std::string> out;
        for (const auto& r : per_node[n])
            if (!r.failed()) out.push_back(r.hash);
        return out;
    }

    std::vector<std::string> pooled_hashes() const {
        std::vector<std::string> out;
        for (size_t n = 0; n < per_node.size(); ++n)
            for (const auto& r : per_node[n])
                if (!r.failed()) out.push_back(r.hash);
        return out;
    }
};

// Simulates the edge fleet: node n runs one persistent instance whose RNG
// stream is seeded with mix_seed(master, n) and survives across that node's
// queries; linear memory is cleared per query (each request is a fresh
// stateless execution). Node streams are independent, so scheduling order
// cannot change the corpus; traces are reported round-robin.
inline TraceCorpus simulate(const Module& m, const FleetConfig& cfg) {
    if (cfg.nodes < 1 || cfg.queries < 1)
        throw std::invalid_argument("fleet needs at least one node and one query");
    TraceCorpus corpus;
    corpus.nodes = cfg.nodes;
    corpus.queries = cfg.queries;
    corpus.per_node.resize(cfg.nodes);
    for (uint32_t n = 0; n < cfg.nodes; ++n) {
        HostConfig host{mix_seed(cfg.master_seed, n), cfg.fuel_limit, cfg.call_depth_limit};
        Instance inst(m, host);
        corpus.per_node[n].reserve(cfg.queries);
        for (uint32_t q = 0; q < cfg.queries; ++q) {
            inst.reset_memory();
            Outcome out = inst.invoke(cfg.endpoint, cfg.input);
            QueryRecord rec;
            rec.fuel = out.trace.fuel_used;
            rec.trap = out.trap;
            rec.result = out.result;
            if (out.ok()) rec.hash = hash_trace(out.trace).digest;
            corpus.per_node[n].push_back(std::move(rec));
        }
    }
    return corpus;
}

// Metric 1: distinct hashes over total hashes for one node.
inline double uniqueness_ratio(std::span<const std::string> hashes) {
    if (hashes.empty()) throw std::invalid_argument("uniqueness_ratio of empty list");
    std::set<std::string_view> distinct(hashes.begin(), hashes.end());
    return static_cast<double>(distinct.size()) / static_cast<double>(hashes.size());
}

// Metric 2: pooled Shannon entropy normalized by log of the corpus size,
// clamped to [0, 1]. 0 = every execution took the same path, 1 = every
// execution took a distinct one.
inline double normalized_entropy(const TraceCorpus& corpus) {
    auto pooled = corpus.pooled_hashes();
    size_t m = pooled.size();
    if (m < 2) throw std::invalid_argument("normalized_entropy needs at least 2 traces");
    std::map<std::string_view, size_t> freq;
    for (const auto& h : pooled) ++freq[h];
    double e = 0.0;
    for (const auto& [h, c] : freq) {
        double p = static_cast<double>(c) / static_cast<double>(m);
        e -= p * std::log(p);
    }
    e /= std::log(static_cast<double>(m));
    if (e < 0.0) return 0.0;
    if (e > 1.0) return 1.0;
    return e;
}

// Corpus CSV in round-robin collection order: query i on every node before
// query i+1. Failed queries carry the trap name in the hash column and an
// empty result.
inline std::string corpus_csv(const TraceCorpus& corpus) {
    std::string out = "node,query,hash,fuel,result\n";
    for (uint32_t q = 0; q < corpus.queries; ++q) {
        for (uint32_t n = 0; n < corpus.nodes; ++n) {
            const QueryRecord& r = corpus.per_node[n][q];
            out += std::to_string(n);
            out += ',';
            out += std::to_string(q);
            out += ',';
            out += r.failed() ? std::string("trap:") + trap_name(r.trap) : r.hash;
            out += ',';
            out += std::to_string(r.fuel);
            out += ',';
            if (r.result) out += std::to_string(static_cast<int32_t>(*r.result));
            out += '\n';
        }
    }
    return out;
}

} // namespace watmv
