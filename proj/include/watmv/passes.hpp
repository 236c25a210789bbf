#pragma once

#include <optional>
#include <string>
#include <vector>

#include "watmv/ast.hpp"

namespace watmv {

// Peephole passes standing in for an edge runtime's pre-codegen cleanups.
// They deliberately reverse the cheap diversifying rewrites: split constants
// merge back, canonical forms collapse.
enum class PassId : uint8_t {
    ConstFold,      // [const a, const b, binop] -> [const r]
    ConstAddMerge,  // [const a, add, const b, add] -> [const a+b, add]
    ConstMulMerge,  // [const a, mul, const b, mul] -> [const a*b, mul]
    Add0Mul1Elim,   // [const 0, add] / [const 1, mul] -> []
    SubToAddCanon,  // [const c, sub] -> [const -c, add]
    NopElim,        // [nop] -> []
};

inline constexpr std::array<PassId, 6> all_passes = {
    PassId::ConstFold,    PassId::ConstAddMerge, PassId::ConstMulMerge,
    PassId::Add0Mul1Elim, PassId::SubToAddCanon, PassId::NopElim,
};

using PassSet = std::vector<PassId>;

inline PassSet default_pass_set() {
    return {all_passes.begin(), all_passes.end()};
}

inline const char* pass_name(PassId id) {
    switch (id) {
        case PassId::ConstFold: return "CONST_FOLD";
        case PassId::ConstAddMerge: return "CONST_ADD_MERGE";
        case PassId::ConstMulMerge: return "CONST_MUL_MERGE";
        case PassId::Add0Mul1Elim: return "ADD0_MUL1_ELIM";
        case PassId::SubToAddCanon: return "SUB_TO_ADD_CANON";
        case PassId::NopElim: return "NOP_ELIM";
    }
    return "?";
}

inline std::optional<PassId> pass_from_name(std::string_view name) {
    for (PassId id : all_passes)
        if (name == pass_name(id)) return id;
    return std::nullopt;
}

namespace detail {

// One scan, first match applied. Returns false when nothing matched.
inline bool apply_pass_once(std::vector<Instr>& body, PassId pass) {
    auto is_c = [&](size_t i) { return i < body.size() && body[i].op == Opcode::I32Const; };
    auto is_op = [&](size_t i, Opcode op) { return i < body.size() && body[i].op == op; };
    auto replace = [&](size_t pos, size_t consumed, std::vector<Instr> repl) {
        body.erase(body.begin() + pos, body.begin() + pos + consumed);
        body.insert(body.begin() + pos, repl.begin(), repl.end());
    };
    for (size_t i = 0; i < body.size(); ++i) {
        switch (pass) {
            case PassId::ConstFold: {
                if (is_c(i) && is_c(i + 1) && i + 2 < body.size()) {
                    auto r = fold_binop(body[i + 2].op, body[i].imm, body[i + 1].imm);
                    if (r) {
                        replace(i, 3, {i32_const(*r)});
                        return true;
                    }
                }
                break;
            }
            case PassId::ConstAddMerge:
                if (is_c(i) && is_op(i + 1, Opcode::I32Add) && is_c(i + 2) &&
                    is_op(i + 3, Opcode::I32Add)) {
                    replace(i, 4, {i32_const(body[i].imm + body[i + 2].imm),
                                   instr(Opcode::I32Add)});
                    return true;
                }
                break;
            case PassId::ConstMulMerge:
                if (is_c(i) && is_op(i + 1, Opcode::I32Mul) && is_c(i + 2) &&
                    is_op(i + 3, Opcode::I32Mul)) {
                    replace(i, 4, {i32_const(body[i].imm * body[i + 2].imm),
                                   instr(Opcode::I32Mul)});
                    return true;
                }
                break;
            case PassId::Add0Mul1Elim:
                if (is_c(i) && body[i].imm == 0 && is_op(i + 1, Opcode::I32Add)) {
                    replace(i, 2, {});
                    return true;
                }
                if (is_c(i) && body[i].imm == 1 && is_op(i + 1, Opcode::I32Mul)) {
                    replace(i, 2, {});
                    return true;
                }
                break;
            case PassId::SubToAddCanon:
                if (is_c(i) && is_op(i + 1, Opcode::I32Sub)) {
                    replace(i, 2, {i32_const(0u - body[i].imm), instr(Opcode::I32Add)});
                    return true;
                }
                break;
            case PassId::NopElim:
                if (is_op(i, Opcode::Nop)) {
                    replace(i, 1, {});
                    return true;
                }
                break;
        }
    }
    return false;
}

} // namespace detail

// Each pass runs to fixpoint in pass order; the whole sweep repeats until
// nothing changes, which makes the result idempotent even when a late pass
// re-enables an early one.
inline Function optimize_function(const Function& f, const PassSet& passes) {
    Function out = f;
    bool changed = true;
    while (changed) {
        changed = false;
        for (PassId pass : passes)
            while (detail::apply_pass_once(out.body, pass)) changed = true;
    }
    return out;
}

inline Module optimize(const Module& m, const PassSet& passes) {
    Module out = m;
    for (auto& f : out.functions) f = optimize_function(f, passes);
    return out;
}

} // namespace watmv
