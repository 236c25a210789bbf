#pragma once

#include <map>
#include <stdexcept>
#include <string>

#include "watmv/ast.hpp"
#include "watmv/dispatcher.hpp"
#include "watmv/enumerate.hpp"
#include "watmv/validate.hpp"

namespace watmv {

class LinkError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void redirect_calls(Function& f, const std::map<std::string, std::string>& redirect) {
    for (auto& ins : f.body) {
        if (ins.op != Opcode::Call) continue;
        auto it = redirect.find(ins.sym);
        if (it != redirect.end()) ins.sym = it->second;
    }
}

} // namespace detail

// Packages originals, variants and one dispatcher per diversified function
// into a single module. Every call to a diversified function — from
// originals and from variants alike, which is what routes recursion through
// the dispatcher — is redirected to that function's dispatcher; dispatcher
// bodies keep their direct calls. Exports of diversified functions are
// rewired the same way, so invoking the endpoint itself is randomized.
inline Module link_multivariant(const Module& m, const std::map<std::string, VariantSet>& sets) {
    // functions that actually gained variants, in module order
    std::vector<const VariantSet*> active;
    for (const auto& f : m.functions) {
        auto it = sets.find(f.name);
        if (it == sets.end() || it->second.variants.empty()) continue;
        active.push_back(&it->second);
    }
    for (const auto& [name, vs] : sets) {
        if (!vs.variants.empty() && m.find_function(name) == nullptr)
            throw LinkError("variant set for unknown function $" + name);
    }
    if (active.empty()) return m;

    std::map<std::string, std::string> redirect;  // f -> f__dispatch
    for (const VariantSet* vs : active) {
        const std::string& target = vs->original.name;
        std::vector<std::string> reserved{dispatcher_name(target)};
        for (const auto& v : vs->variants) reserved.push_back(v.name);
        for (const auto& r : reserved)
            if (m.has_name(r)) throw LinkError("name collision with reserved suffix: $" + r);
        redirect[target] = dispatcher_name(target);
    }

    Module out;
    out.memory_pages = m.memory_pages;
    out.imports = m.imports;
    const std::string rng_name = "random_u32";
    if (m.find_import(rng_name) == nullptr) {
        if (m.find_function(rng_name) != nullptr)
            throw LinkError("name collision with reserved import: $" + rng_name);
        out.imports.push_back({"env", "random_u32", FuncType{0, true}, rng_name});
    }

    for (const auto& f : m.functions) {
        out.functions.push_back(f);
        detail::redirect_calls(out.functions.back(), redirect);
    }
    for (const VariantSet* vs : active) {
        for (const auto& v : vs->variants) {
            out.functions.push_back(v);
            detail::redirect_calls(out.functions.back(), redirect);
        }
        DispatcherSpec spec;
        spec.target = vs->original.name;
        for (const auto& v : vs->variants) spec.choices.push_back(v.name);
        spec.choices.push_back(vs->original.name);  // default branch
        spec.rng_import = rng_name;
        out.functions.push_back(synthesize_dispatcher(spec, out));
    }

    out.exports = m.exports;
    for (auto& e : out.exports) {
        auto it = redirect.find(e.func);
        if (it != redirect.end()) e.func = it->second;
    }

    if (auto v = validate(out); !v.empty())
        throw LinkError("linked module invalid: " + v.front().rule + " in $" +
                        v.front().function);
    return out;
}

} // namespace watmv
