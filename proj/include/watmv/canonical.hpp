#pragma once

#include <map>
#include <string>

#include "watmv/ast.hpp"
#include "watmv/printer.hpp"
#include "watmv/sha256.hpp"

namespace watmv {

// Renumbers non-parameter locals in order of first use and drops unused
// ones, so two bodies that differ only in scratch-register choice compare
// equal. Parameters keep their indices (they are the call ABI).
inline Function renumber_locals(const Function& f) {
    Function out = f;
    std::map<uint32_t, uint32_t> remap;
    uint32_t next = f.type.params;
    for (auto& ins : out.body) {
        if (ins.op != Opcode::LocalGet && ins.op != Opcode::LocalSet &&
            ins.op != Opcode::LocalTee)
            continue;
        if (ins.imm < f.type.params) continue;
        auto [it, fresh] = remap.try_emplace(ins.imm, next);
        if (fresh) ++next;
        ins.imm = it->second;
    }
    out.locals = next - f.type.params;
    return out;
}

// Signature + renumbered body, without the function name. Equal canonical
// text means structurally identical behavior-carrying code.
inline std::string canonical_body_text(const Function& f) {
    Function canon = renumber_locals(f);
    std::string out;
    detail::print_signature(out, canon.type);
    out += " (locals ";
    out += std::to_string(canon.locals);
    out += ")";
    for (const auto& ins : canon.body) {
        out += '\n';
        detail::print_instr_text(out, ins);
    }
    return out;
}

// SHA-256 of the canonical body text. Names do not participate: two
// structurally identical functions hash equal regardless of their names.
inline std::string canonical_hash(const Function& f) {
    return sha256_hex(canonical_body_text(f));
}

} // namespace watmv
