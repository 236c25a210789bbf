#pragma once

#include <string>

#include "watmv/ast.hpp"

namespace watmv {

namespace detail {

inline void print_i32(std::string& out, uint32_t v) {
    out += std::to_string(static_cast<int32_t>(v));
}

inline void print_instr_text(std::string& out, const Instr& ins) {
    out += opcode_name(ins.op);
    switch (ins.op) {
        case Opcode::I32Const:
            out += ' ';
            print_i32(out, ins.imm);
            break;
        case Opcode::LocalGet:
        case Opcode::LocalSet:
        case Opcode::LocalTee:
        case Opcode::Br:
        case Opcode::BrIf:
            out += ' ';
            out += std::to_string(ins.imm);
            break;
        case Opcode::Call:
            out += " $";
            out += ins.sym;
            break;
        case Opcode::I32Load:
        case Opcode::I32Store:
            if (ins.imm != 0) {
                out += " offset=";
                out += std::to_string(ins.imm);
            }
            break;
        default:
            break;
    }
}

inline void print_signature(std::string& out, const FuncType& t) {
    if (t.params > 0) {
        out += " (param";
        for (uint32_t i = 0; i < t.params; ++i) out += " i32";
        out += ')';
    }
    if (t.result) out += " (result i32)";
}

inline std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    out += '"';
    return out;
}

} // namespace detail

// Canonical text: fields in memory/import/func/export order, two-space
// indentation, one instruction per line with block-structured indent.
// parse_module(print_module(m)) is structurally equal to m.
inline std::string print_function(const Function& f, int base_indent = 1) {
    std::string out;
    std::string pad(static_cast<size_t>(base_indent) * 2, ' ');
    out += pad + "(func $" + f.name;
    detail::print_signature(out, f.type);
    if (f.locals > 0) {
        out += " (local";
        for (uint32_t i = 0; i < f.locals; ++i) out += " i32";
        out += ')';
    }
    int depth = base_indent + 1;
    for (const auto& ins : f.body) {
        if (ins.op == Opcode::End || ins.op == Opcode::Else)
            depth = depth > base_indent + 1 ? depth - 1 : depth;
        out += '\n';
        out.append(static_cast<size_t>(depth) * 2, ' ');
        detail::print_instr_text(out, ins);
        if (ins.op == Opcode::Block || ins.op == Opcode::Loop || ins.op == Opcode::If ||
            ins.op == Opcode::Else)
            ++depth;
    }
    out += ")";
    return out;
}

inline std::string print_module(const Module& m) {
    bool empty = m.imports.empty() && m.functions.empty() && m.exports.empty() &&
                 !m.memory_pages.has_value();
    if (empty) return "(module)\n";
    std::string out = "(module";
    if (m.memory_pages) out += "\n  (memory " + std::to_string(*m.memory_pages) + ")";
    for (const auto& i : m.imports) {
        out += "\n  (import " + detail::quote(i.module) + " " + detail::quote(i.field) +
               " (func $" + i.local_name;
        detail::print_signature(out, i.type);
        out += "))";
    }
    for (const auto& f : m.functions) {
        out += '\n';
        out += print_function(f);
    }
    for (const auto& e : m.exports)
        out += "\n  (export " + detail::quote(e.name) + " (func $" + e.func + "))";
    out += ")\n";
    return out;
}

} // namespace watmv
