#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "watmv/ast.hpp"
#include "watmv/interp.hpp"
#include "watmv/rng.hpp"

namespace watmv {

// Differential-testing configuration. The boundary values cover the signed
// extremes and the small magnitudes where wrap-around rewrites go wrong
// first; random tuples cover the rest.
struct OracleConfig {
    size_t random_samples = 4096;
    std::vector<uint32_t> boundary = {0u, 1u, 0xFFFFFFFFu, 0x7FFFFFFFu,
                                      0x80000000u, 2u, 0xFFFFFFFEu};
    size_t memory_probe_cells = 64;  // i32 words compared after each run
    uint64_t seed = 0x0DDB1A5E5BAD5EEDULL;
};

struct EquivalenceResult {
    bool equivalent = true;
    std::vector<uint32_t> counterexample;  // first differing input tuple
    std::string detail;                    // what differed

    explicit operator bool() const { return equivalent; }
};

namespace detail {

// The candidate function swapped into the context module, exported under a
// fixed name. Without a context, the function must be self-contained.
inline Module oracle_module(const Function& f, const Module* context) {
    Module m;
    if (context != nullptr) {
        m = *context;
        if (Function* slot = m.find_function(f.name)) {
            std::string name = slot->name;
            *slot = f;
            slot->name = name;
        } else {
            m.functions.push_back(f);
        }
    } else {
        for (const auto& ins : f.body)
            if (ins.op == Opcode::Call)
                throw std::invalid_argument(
                    "check_equivalence needs a module context for functions with calls");
        m.functions.push_back(f);
    }
    m.exports.clear();
    m.exports.push_back({"__oracle", f.name});
    return m;
}

inline std::vector<std::vector<uint32_t>> oracle_inputs(const FuncType& type,
                                                        const OracleConfig& cfg) {
    std::vector<std::vector<uint32_t>> inputs;
    const auto& bs = cfg.boundary;
    if (type.params == 0) {
        inputs.push_back({});
    } else if (type.params == 1) {
        for (uint32_t v : bs) inputs.push_back({v});
    } else if (type.params == 2) {
        for (uint32_t a : bs)
            for (uint32_t b : bs) inputs.push_back({a, b});
    } else {
        for (uint32_t v : bs) inputs.push_back(std::vector<uint32_t>(type.params, v));
    }
    SplitMix64 rng(cfg.seed);
    for (size_t i = 0; i < cfg.random_samples; ++i) {
        std::vector<uint32_t> tuple(type.params);
        for (auto& v : tuple) v = rng.next_u32();
        inputs.push_back(std::move(tuple));
    }
    return inputs;
}

} // namespace detail

// Runs f and g on the boundary set (full cross-product up to arity 2) plus
// random tuples, comparing result, trap kind and a prefix of linear memory.
// Both sides see the same RNG seed per input, so functions that consume host
// randomness stay comparable as long as rewrites preserve the call sequence.
inline EquivalenceResult check_equivalence(const Function& f, const Function& g,
                                           const OracleConfig& cfg = {},
                                           const Module* context = nullptr) {
    if (!(f.type == g.type))
        throw std::invalid_argument("check_equivalence: type mismatch between $" + f.name +
                                    " and $" + g.name);
    Module mf = detail::oracle_module(f, context);
    Module mg = detail::oracle_module(g, context);
    auto inputs = detail::oracle_inputs(f.type, cfg);
    for (size_t i = 0; i < inputs.size(); ++i) {
        HostConfig host;
        host.rng_seed = mix_seed(cfg.seed, i);
        Instance inst_f(mf, host);
        Instance inst_g(mg, host);
        Outcome of = inst_f.invoke("__oracle", inputs[i]);
        Outcome og = inst_g.invoke("__oracle", inputs[i]);
        if (of.trap != og.trap)
            return {false, inputs[i],
                    std::string("trap mismatch: ") + trap_name(of.trap) + " vs " +
                        trap_name(og.trap)};
        if (of.ok() && of.result != og.result) return {false, inputs[i], "result mismatch"};
        if (of.ok() && mf.memory_pages.value_or(0) > 0) {
            for (size_t w = 0; w < cfg.memory_probe_cells; ++w) {
                if (inst_f.memory_word(w) != inst_g.memory_word(w))
                    return {false, inputs[i],
                            "memory mismatch at word " + std::to_string(w)};
            }
        }
    }
    return {};
}

} // namespace watmv
