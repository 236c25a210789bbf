#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace watmv {

// The instruction set is the i32 subset of the WebAssembly text format that
// the transformation rules operate on. Constants are stored as unsigned
// 32-bit values; signed operations reinterpret them as two's complement.
enum class Opcode : uint8_t {
    I32Const,
    I32Add,
    I32Sub,
    I32Mul,
    I32DivS,
    I32RemS,
    I32And,
    I32Or,
    I32Xor,
    I32Shl,
    I32ShrS,
    I32ShrU,
    I32Eqz,
    I32Eq,
    I32Ne,
    I32LtS,
    I32GtS,
    I32LeS,
    I32GeS,
    LocalGet,
    LocalSet,
    LocalTee,
    Call,
    Drop,
    Select,
    Nop,
    Block,
    Loop,
    If,
    Else,
    End,
    Br,
    BrIf,
    Return,
    I32Load,
    I32Store,
};

struct SourceLoc {
    uint32_t line = 0;
    uint32_t column = 0;
};

struct Instr {
    Opcode op;
    // const value, local index, branch depth or memory offset, by opcode.
    uint32_t imm = 0;
    // call target name (Call only).
    std::string sym;
    SourceLoc loc{};

    friend bool operator==(const Instr& a, const Instr& b) {
        return a.op == b.op && a.imm == b.imm && a.sym == b.sym;
    }
};

inline Instr instr(Opcode op) { return Instr{op, 0, {}, {}}; }
inline Instr instr(Opcode op, uint32_t imm) { return Instr{op, imm, {}, {}}; }
inline Instr i32_const(uint32_t v) { return Instr{Opcode::I32Const, v, {}, {}}; }
inline Instr call(std::string target) { return Instr{Opcode::Call, 0, std::move(target), {}}; }

// Only i32 exists in this subset, so a function type is a parameter count
// plus an optional i32 result.
struct FuncType {
    uint32_t params = 0;
    bool result = false;

    friend bool operator==(const FuncType&, const FuncType&) = default;
};

// Provenance of a function within a multivariant module. Not part of the
// textual format; reconstructed from naming conventions and variant-set
// metadata when modules round-trip through files.
struct Origin {
    enum class Kind : uint8_t { Original, Variant, Dispatcher };
    Kind kind = Kind::Original;
    std::string target;                   // diversified function (Variant/Dispatcher)
    std::vector<std::string> rule_chain;  // stacked rewrites that produced a Variant

    static Origin original() { return {}; }
    static Origin variant_of(std::string t, std::vector<std::string> rules) {
        return Origin{Kind::Variant, std::move(t), std::move(rules)};
    }
    static Origin dispatcher_for(std::string t) {
        return Origin{Kind::Dispatcher, std::move(t), {}};
    }
};

struct Function {
    std::string name;
    FuncType type;
    uint32_t locals = 0;  // extra i32 locals beyond the parameters
    std::vector<Instr> body;
    Origin origin = Origin::original();

    uint32_t total_locals() const { return type.params + locals; }
};

// Structural equality: what the text format can represent. Origin tags are
// metadata and deliberately excluded.
inline bool structurally_equal(const Function& a, const Function& b) {
    return a.name == b.name && a.type == b.type && a.locals == b.locals && a.body == b.body;
}

struct Import {
    std::string module;
    std::string field;
    FuncType type;
    std::string local_name;  // the $id a call instruction refers to

    friend bool operator==(const Import&, const Import&) = default;
};

struct Export {
    std::string name;  // external name
    std::string func;  // function or import referenced

    friend bool operator==(const Export&, const Export&) = default;
};

struct Module {
    std::vector<Import> imports;
    std::vector<Function> functions;
    std::vector<Export> exports;
    std::optional<uint32_t> memory_pages;  // 64 KiB pages

    const Function* find_function(std::string_view name) const {
        for (const auto& f : functions)
            if (f.name == name) return &f;
        return nullptr;
    }

    Function* find_function(std::string_view name) {
        for (auto& f : functions)
            if (f.name == name) return &f;
        return nullptr;
    }

    const Import* find_import(std::string_view local_name) const {
        for (const auto& i : imports)
            if (i.local_name == local_name) return &i;
        return nullptr;
    }

    const Export* find_export(std::string_view name) const {
        for (const auto& e : exports)
            if (e.name == name) return &e;
        return nullptr;
    }

    // Type of a call target, import or function.
    const FuncType* callee_type(std::string_view name) const {
        if (const auto* f = find_function(name)) return &f->type;
        if (const auto* i = find_import(name)) return &i->type;
        return nullptr;
    }

    bool has_name(std::string_view name) const {
        return find_function(name) != nullptr || find_import(name) != nullptr;
    }
};

inline bool structurally_equal(const Module& a, const Module& b) {
    if (a.imports != b.imports || a.exports != b.exports || a.memory_pages != b.memory_pages)
        return false;
    if (a.functions.size() != b.functions.size()) return false;
    for (size_t i = 0; i < a.functions.size(); ++i)
        if (!structurally_equal(a.functions[i], b.functions[i])) return false;
    return true;
}

inline const char* opcode_name(Opcode op) {
    switch (op) {
        case Opcode::I32Const: return "i32.const";
        case Opcode::I32Add: return "i32.add";
        case Opcode::I32Sub: return "i32.sub";
        case Opcode::I32Mul: return "i32.mul";
        case Opcode::I32DivS: return "i32.div_s";
        case Opcode::I32RemS: return "i32.rem_s";
        case Opcode::I32And: return "i32.and";
        case Opcode::I32Or: return "i32.or";
        case Opcode::I32Xor: return "i32.xor";
        case Opcode::I32Shl: return "i32.shl";
        case Opcode::I32ShrS: return "i32.shr_s";
        case Opcode::I32ShrU: return "i32.shr_u";
        case Opcode::I32Eqz: return "i32.eqz";
        case Opcode::I32Eq: return "i32.eq";
        case Opcode::I32Ne: return "i32.ne";
        case Opcode::I32LtS: return "i32.lt_s";
        case Opcode::I32GtS: return "i32.gt_s";
        case Opcode::I32LeS: return "i32.le_s";
        case Opcode::I32GeS: return "i32.ge_s";
        case Opcode::LocalGet: return "local.get";
        case Opcode::LocalSet: return "local.set";
        case Opcode::LocalTee: return "local.tee";
        case Opcode::Call: return "call";
        case Opcode::Drop: return "drop";
        case Opcode::Select: return "select";
        case Opcode::Nop: return "nop";
        case Opcode::Block: return "block";
        case Opcode::Loop: return "loop";
        case Opcode::If: return "if";
        case Opcode::Else: return "else";
        case Opcode::End: return "end";
        case Opcode::Br: return "br";
        case Opcode::BrIf: return "br_if";
        case Opcode::Return: return "return";
        case Opcode::I32Load: return "i32.load";
        case Opcode::I32Store: return "i32.store";
    }
    return "?";
}

// Pure i32 binary operators, usable both by the interpreter and by constant
// folding. div_s/rem_s are excluded here because they can trap.
inline std::optional<uint32_t> eval_pure_binop(Opcode op, uint32_t a, uint32_t b) {
    auto s = [](uint32_t v) { return static_cast<int32_t>(v); };
    switch (op) {
        case Opcode::I32Add: return a + b;
        case Opcode::I32Sub: return a - b;
        case Opcode::I32Mul: return a * b;
        case Opcode::I32And: return a & b;
        case Opcode::I32Or: return a | b;
        case Opcode::I32Xor: return a ^ b;
        case Opcode::I32Shl: return a << (b & 31);
        case Opcode::I32ShrS: return static_cast<uint32_t>(s(a) >> (b & 31));
        case Opcode::I32ShrU: return a >> (b & 31);
        case Opcode::I32Eq: return a == b ? 1u : 0u;
        case Opcode::I32Ne: return a != b ? 1u : 0u;
        case Opcode::I32LtS: return s(a) < s(b) ? 1u : 0u;
        case Opcode::I32GtS: return s(a) > s(b) ? 1u : 0u;
        case Opcode::I32LeS: return s(a) <= s(b) ? 1u : 0u;
        case Opcode::I32GeS: return s(a) >= s(b) ? 1u : 0u;
        default: return std::nullopt;
    }
}

// Folds any foldable [const a, const b, op] window, including div_s/rem_s
// when they cannot trap. nullopt means "leave it to the interpreter".
inline std::optional<uint32_t> fold_binop(Opcode op, uint32_t a, uint32_t b) {
    if (auto v = eval_pure_binop(op, a, b)) return v;
    constexpr uint32_t int_min = 0x80000000u;
    constexpr uint32_t minus_one = 0xFFFFFFFFu;
    if (op == Opcode::I32DivS) {
        if (b == 0 || (a == int_min && b == minus_one)) return std::nullopt;
        return static_cast<uint32_t>(static_cast<int32_t>(a) / static_cast<int32_t>(b));
    }
    if (op == Opcode::I32RemS) {
        if (b == 0) return std::nullopt;
        if (a == int_min && b == minus_one) return 0u;  // defined, unlike div_s
        return static_cast<uint32_t>(static_cast<int32_t>(a) % static_cast<int32_t>(b));
    }
    return std::nullopt;
}

} // namespace watmv
