#pragma once

#include <deque>
#include <set>
#include <string>
#include <vector>

#include "watmv/ast.hpp"
#include "watmv/canonical.hpp"
#include "watmv/oracle.hpp"
#include "watmv/rewrite.hpp"
#include "watmv/rng.hpp"

namespace watmv {

struct EnumLimits {
    size_t max_variants = 64;
    size_t max_depth = 3;           // stacked rewrites per variant
    uint64_t step_budget = 100000;  // candidate rewrites considered; a step
                                    // count rather than wall clock keeps
                                    // enumeration deterministic
};

// The certified equivalent variants of one function. The original is stored
// separately and never appears among the variants.
struct VariantSet {
    Function original;
    std::vector<Function> variants;
    uint64_t steps_used = 0;
    size_t rejected = 0;  // candidates the oracle refused
};

inline bool touches_memory(const Function& f) {
    for (const auto& ins : f.body)
        if (ins.op == Opcode::I32Load || ins.op == Opcode::I32Store) return true;
    return false;
}

// Breadth-first enumeration of stacked rewrites. Windows are scanned left to
// right and rules tried in fixed id order at each window; rule-local
// randomness comes from a PRNG seeded by (seed, function name), so the
// result is a pure function of (f, rules, limits, seed).
//
// Functions touching linear memory are not diversified and yield an empty
// set.
inline VariantSet enumerate_variants(const Function& f, std::vector<RuleId> rules,
                                     const EnumLimits& limits, uint64_t seed,
                                     const Module* context = nullptr,
                                     const OracleConfig& oracle = {}) {
    VariantSet out;
    out.original = f;
    if (touches_memory(f)) return out;

    std::sort(rules.begin(), rules.end());
    rules.erase(std::unique(rules.begin(), rules.end()), rules.end());

    SplitMix64 rng(mix_seed(seed, fnv1a64(f.name)));
    std::set<std::string> seen{canonical_hash(f)};

    struct Pending {
        std::vector<Instr> body;
        std::vector<std::string> chain;
        size_t depth;
    };
    std::deque<Pending> queue;
    queue.push_back({f.body, {}, 0});

    while (!queue.empty() && out.variants.size() < limits.max_variants &&
           out.steps_used < limits.step_budget) {
        Pending cur = std::move(queue.front());
        queue.pop_front();
        if (cur.depth >= limits.max_depth) continue;
        Function base = f;
        base.body = cur.body;
        for (size_t pos = 0; pos < base.body.size(); ++pos) {
            for (RuleId rule : rules) {
                if (out.variants.size() >= limits.max_variants ||
                    out.steps_used >= limits.step_budget)
                    break;
                auto rewritten = try_apply_rule(rule, base, pos, rng);
                if (!rewritten) continue;
                ++out.steps_used;
                Function cand = f;
                cand.body = std::move(*rewritten);
                if (!seen.insert(canonical_hash(cand)).second) continue;
                if (!check_equivalence(f, cand, oracle, context)) {
                    ++out.rejected;
                    continue;
                }
                std::vector<std::string> chain = cur.chain;
                chain.emplace_back(rule_name(rule));
                cand.name = f.name + "__v" + std::to_string(out.variants.size() + 1);
                cand.origin = Origin::variant_of(f.name, chain);
                queue.push_back({cand.body, chain, cur.depth + 1});
                out.variants.push_back(std::move(cand));
            }
        }
    }
    return out;
}

} // namespace watmv
