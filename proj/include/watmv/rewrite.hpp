#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "watmv/ast.hpp"
#include "watmv/modmath.hpp"
#include "watmv/rng.hpp"

namespace watmv {

// Semantics-preserving rewrites over instruction windows, in fixed id order.
// Each is additionally certified per candidate by the differential oracle.
enum class RuleId : uint8_t {
    ConstAddSplit,   // [const c, add]            -> n split additions
    AddSubInvert,    // [const c, add|sub]        -> [const -c, sub|add]
    MulFactorSplit,  // [const c, mul]            -> two wrapping multiplications
    Mul2ToAdd,       // [local.get i, const 2, mul] -> [local.get i, local.get i, add]
    ConstInfer,      // [const a, const b, binop] -> [const (a op b)]
    LoopUnroll,      // simple loop               -> body once + guarded loop
};

inline constexpr std::array<RuleId, 6> all_rules = {
    RuleId::ConstAddSplit, RuleId::AddSubInvert, RuleId::MulFactorSplit,
    RuleId::Mul2ToAdd,     RuleId::ConstInfer,   RuleId::LoopUnroll,
};

inline const char* rule_name(RuleId id) {
    switch (id) {
        case RuleId::ConstAddSplit: return "CONST_ADD_SPLIT";
        case RuleId::AddSubInvert: return "ADD_SUB_INVERT";
        case RuleId::MulFactorSplit: return "MUL_FACTOR_SPLIT";
        case RuleId::Mul2ToAdd: return "MUL2_TO_ADD";
        case RuleId::ConstInfer: return "CONST_INFER";
        case RuleId::LoopUnroll: return "LOOP_UNROLL";
    }
    return "?";
}

inline std::optional<RuleId> rule_from_name(std::string_view name) {
    for (RuleId id : all_rules)
        if (name == rule_name(id)) return id;
    return std::nullopt;
}

namespace detail {

inline bool is_const(const Instr& i) { return i.op == Opcode::I32Const; }

// Replaces body[pos, pos+consumed) with `replacement`.
inline std::vector<Instr> splice(const std::vector<Instr>& body, size_t pos, size_t consumed,
                                 const std::vector<Instr>& replacement) {
    std::vector<Instr> out;
    out.reserve(body.size() - consumed + replacement.size());
    out.insert(out.end(), body.begin(), body.begin() + pos);
    out.insert(out.end(), replacement.begin(), replacement.end());
    out.insert(out.end(), body.begin() + pos + consumed, body.end());
    return out;
}

inline bool is_branchless_flat(const std::vector<Instr>& body, size_t from, size_t to) {
    for (size_t i = from; i < to; ++i) {
        switch (body[i].op) {
            case Opcode::Block:
            case Opcode::Loop:
            case Opcode::If:
            case Opcode::Else:
            case Opcode::End:
            case Opcode::Br:
            case Opcode::BrIf:
            case Opcode::Return:
                return false;
            default:
                break;
        }
    }
    return true;
}

// Matching end of the block opened at `pos`, or nullopt if malformed.
inline std::optional<size_t> matching_end(const std::vector<Instr>& body, size_t pos) {
    size_t depth = 0;
    for (size_t i = pos; i < body.size(); ++i) {
        switch (body[i].op) {
            case Opcode::Block:
            case Opcode::Loop:
            case Opcode::If:
                ++depth;
                break;
            case Opcode::End:
                if (--depth == 0) return i;
                break;
            default:
                break;
        }
    }
    return std::nullopt;
}

} // namespace detail

// Applies `rule` at window position `pos` of f's body. Returns the rewritten
// body, or nullopt when the window does not match. Randomized rules draw
// from `rng`, so application order fixes the result.
inline std::optional<std::vector<Instr>> try_apply_rule(RuleId rule, const Function& f,
                                                        size_t pos, SplitMix64& rng) {
    const auto& body = f.body;
    const size_t n = body.size();
    using detail::is_const;
    switch (rule) {
        case RuleId::ConstAddSplit: {
            if (pos + 1 >= n || !is_const(body[pos]) || body[pos + 1].op != Opcode::I32Add)
                return std::nullopt;
            size_t parts = 2 + static_cast<size_t>(rng.next_below(3));  // 2..4
            std::vector<uint32_t> ks = split_add_const(body[pos].imm, parts, rng);
            std::vector<Instr> repl;
            for (uint32_t k : ks) {
                repl.push_back(i32_const(k));
                repl.push_back(instr(Opcode::I32Add));
            }
            return detail::splice(body, pos, 2, repl);
        }
        case RuleId::AddSubInvert: {
            if (pos + 1 >= n || !is_const(body[pos])) return std::nullopt;
            Opcode next = body[pos + 1].op;
            if (next != Opcode::I32Add && next != Opcode::I32Sub) return std::nullopt;
            Opcode flipped = next == Opcode::I32Add ? Opcode::I32Sub : Opcode::I32Add;
            return detail::splice(body, pos, 2, {i32_const(0u - body[pos].imm), instr(flipped)});
        }
        case RuleId::MulFactorSplit: {
            if (pos + 1 >= n || !is_const(body[pos]) || body[pos + 1].op != Opcode::I32Mul)
                return std::nullopt;
            auto [a, b] = split_mul_const(body[pos].imm, rng);
            return detail::splice(
                body, pos, 2,
                {i32_const(b), instr(Opcode::I32Mul), i32_const(a), instr(Opcode::I32Mul)});
        }
        case RuleId::Mul2ToAdd: {
            if (pos + 2 >= n || body[pos].op != Opcode::LocalGet || !is_const(body[pos + 1]) ||
                body[pos + 1].imm != 2 || body[pos + 2].op != Opcode::I32Mul)
                return std::nullopt;
            uint32_t local = body[pos].imm;
            return detail::splice(body, pos, 3,
                                  {instr(Opcode::LocalGet, local), instr(Opcode::LocalGet, local),
                                   instr(Opcode::I32Add)});
        }
        case RuleId::ConstInfer: {
            if (pos + 2 >= n || !is_const(body[pos]) || !is_const(body[pos + 1]))
                return std::nullopt;
            auto folded = fold_binop(body[pos + 2].op, body[pos].imm, body[pos + 1].imm);
            if (!folded) return std::nullopt;
            return detail::splice(body, pos, 3, {i32_const(*folded)});
        }
        case RuleId::LoopUnroll: {
            // Only the shape [loop, B..., br_if 0, end] with a flat,
            // branch-free B; becomes B + if { loop B br_if 0 end }.
            if (pos >= n || body[pos].op != Opcode::Loop) return std::nullopt;
            auto end = detail::matching_end(body, pos);
            if (!end) return std::nullopt;
            size_t e = *end;
            if (e < pos + 3) return std::nullopt;  // need at least one body instruction
            const Instr& last = body[e - 1];
            if (last.op != Opcode::BrIf || last.imm != 0) return std::nullopt;
            if (!detail::is_branchless_flat(body, pos + 1, e - 1)) return std::nullopt;
            std::vector<Instr> inner(body.begin() + pos + 1, body.begin() + e - 1);
            std::vector<Instr> repl;
            repl.insert(repl.end(), inner.begin(), inner.end());
            repl.push_back(instr(Opcode::If));
            repl.push_back(instr(Opcode::Loop));
            repl.insert(repl.end(), inner.begin(), inner.end());
            repl.push_back(instr(Opcode::BrIf, 0));
            repl.push_back(instr(Opcode::End));
            repl.push_back(instr(Opcode::End));
            return detail::splice(body, pos, e - pos + 1, repl);
        }
    }
    return std::nullopt;
}

} // namespace watmv
