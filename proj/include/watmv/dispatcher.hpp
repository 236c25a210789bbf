#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "watmv/ast.hpp"

namespace watmv {

inline constexpr const char* dispatcher_suffix = "__dispatch";
inline constexpr const char* variant_infix = "__v";

inline std::string dispatcher_name(std::string_view target) {
    return std::string(target) + dispatcher_suffix;
}

struct DispatcherSpec {
    std::string target;                // original function
    std::vector<std::string> choices;  // variants, original appended last
    std::string rng_import = "random_u32";
};

// Emits the randomizing dispatcher for one diversified function: draw a
// 32-bit random value, reduce it mod |choices| as an unsigned quantity, then
// select the callee through a chain of equality-guarded direct calls. No
// indirect calls anywhere. The final branch falls through to the original.
//
// The subset has no unsigned remainder, so idx is computed as
//   ((x >>u 1) rem_s k) * 2 + (x & 1)) rem_s k
// which equals the unsigned x mod k: every intermediate value fits in a
// non-negative i32, where rem_s agrees with unsigned modulo.
inline Function synthesize_dispatcher(const DispatcherSpec& spec, const Module& m) {
    if (spec.choices.size() < 2)
        throw std::invalid_argument("dispatcher for $" + spec.target + " needs >= 2 choices");
    const FuncType* target_type = m.callee_type(spec.target);
    if (target_type == nullptr)
        throw std::invalid_argument("dispatcher target $" + spec.target + " not found");
    for (const auto& c : spec.choices) {
        const FuncType* t = m.callee_type(c);
        if (t == nullptr || !(*t == *target_type))
            throw std::invalid_argument("dispatcher choice $" + c + " signature mismatch");
    }

    Function d;
    d.name = dispatcher_name(spec.target);
    d.type = *target_type;
    d.locals = 2;
    d.origin = Origin::dispatcher_for(spec.target);
    const uint32_t raw_local = d.type.params;      // raw random draw
    const uint32_t idx_local = d.type.params + 1;  // selected index
    const uint32_t k = static_cast<uint32_t>(spec.choices.size());

    auto& b = d.body;
    b.push_back(call(spec.rng_import));
    b.push_back(instr(Opcode::LocalTee, raw_local));
    b.push_back(i32_const(1));
    b.push_back(instr(Opcode::I32ShrU));
    b.push_back(i32_const(k));
    b.push_back(instr(Opcode::I32RemS));
    b.push_back(i32_const(2));
    b.push_back(instr(Opcode::I32Mul));
    b.push_back(instr(Opcode::LocalGet, raw_local));
    b.push_back(i32_const(1));
    b.push_back(instr(Opcode::I32And));
    b.push_back(instr(Opcode::I32Add));
    b.push_back(i32_const(k));
    b.push_back(instr(Opcode::I32RemS));
    b.push_back(instr(Opcode::LocalSet, idx_local));

    auto push_args = [&]() {
        for (uint32_t p = 0; p < d.type.params; ++p) b.push_back(instr(Opcode::LocalGet, p));
    };
    for (uint32_t i = 0; i + 1 < k; ++i) {
        b.push_back(instr(Opcode::LocalGet, idx_local));
        b.push_back(i32_const(i));
        b.push_back(instr(Opcode::I32Eq));
        b.push_back(instr(Opcode::If));
        push_args();
        b.push_back(call(spec.choices[i]));
        b.push_back(instr(Opcode::Return));
        b.push_back(instr(Opcode::End));
    }
    push_args();
    b.push_back(call(spec.choices.back()));
    return d;
}

} // namespace watmv
