#pragma once

#include <cctype>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "watmv/ast.hpp"

namespace watmv {

class ParseError : public std::runtime_error {
public:
    ParseError(std::string msg, SourceLoc loc)
        : std::runtime_error(msg + " at " + std::to_string(loc.line) + ":" +
                             std::to_string(loc.column)),
          loc_(loc) {}

    SourceLoc loc() const { return loc_; }

private:
    SourceLoc loc_;
};

namespace detail {

struct Token {
    enum class Kind { LParen, RParen, Atom, String, End };
    Kind kind;
    std::string text;
    SourceLoc loc;
};

class Lexer {
public:
    explicit Lexer(std::string_view src) : src_(src) {}

    Token next() {
        skip_trivia();
        SourceLoc loc{line_, col_};
        if (pos_ >= src_.size()) return {Token::Kind::End, "", loc};
        char c = src_[pos_];
        if (c == '(') {
            advance();
            return {Token::Kind::LParen, "(", loc};
        }
        if (c == ')') {
            advance();
            return {Token::Kind::RParen, ")", loc};
        }
        if (c == '"') return lex_string(loc);
        if (is_atom_char(c)) {
            std::string text;
            while (pos_ < src_.size() && is_atom_char(src_[pos_])) {
                text.push_back(src_[pos_]);
                advance();
            }
            return {Token::Kind::Atom, text, loc};
        }
        throw ParseError(std::string("lexical error: unexpected character '") + c + "'", loc);
    }

private:
    static bool is_atom_char(char c) {
        return !std::isspace(static_cast<unsigned char>(c)) && c != '(' && c != ')' &&
               c != '"' && c != ';';
    }

    void advance() {
        if (src_[pos_] == '\n') {
            ++line_;
            col_ = 1;
        } else {
            ++col_;
        }
        ++pos_;
    }

    void skip_trivia() {
        while (pos_ < src_.size()) {
            char c = src_[pos_];
            if (std::isspace(static_cast<unsigned char>(c))) {
                advance();
            } else if (c == ';' && pos_ + 1 < src_.size() && src_[pos_ + 1] == ';') {
                while (pos_ < src_.size() && src_[pos_] != '\n') advance();
            } else if (c == ';') {
                throw ParseError("lexical error: stray ';'", {line_, col_});
            } else {
                break;
            }
        }
    }

    Token lex_string(SourceLoc loc) {
        advance();  // opening quote
        std::string text;
        while (pos_ < src_.size() && src_[pos_] != '"') {
            char c = src_[pos_];
            if (c == '\\') {
                advance();
                if (pos_ >= src_.size()) break;
                char e = src_[pos_];
                if (e == '\\' || e == '"') {
                    text.push_back(e);
                } else {
                    throw ParseError("lexical error: unsupported escape", {line_, col_});
                }
                advance();
            } else if (c == '\n') {
                throw ParseError("lexical error: unterminated string", loc);
            } else {
                text.push_back(c);
                advance();
            }
        }
        if (pos_ >= src_.size()) throw ParseError("lexical error: unterminated string", loc);
        advance();  // closing quote
        return {Token::Kind::String, text, loc};
    }

    std::string_view src_;
    size_t pos_ = 0;
    uint32_t line_ = 1;
    uint32_t col_ = 1;
};

inline bool is_integer_atom(std::string_view s) {
    if (s.empty()) return false;
    size_t i = (s[0] == '-') ? 1 : 0;
    if (i == s.size()) return false;
    for (; i < s.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    return true;
}

// Decimal integer, optionally negative, reduced mod 2^32.
inline uint32_t parse_u32_mod(std::string_view s, SourceLoc loc) {
    if (!is_integer_atom(s)) throw ParseError("expected integer, got '" + std::string(s) + "'", loc);
    bool neg = s[0] == '-';
    uint32_t v = 0;
    for (size_t i = neg ? 1 : 0; i < s.size(); ++i)
        v = v * 10u + static_cast<uint32_t>(s[i] - '0');
    return neg ? 0u - v : v;
}

// Opcodes that take no immediate.
inline const std::map<std::string, Opcode, std::less<>>& plain_opcodes() {
    static const std::map<std::string, Opcode, std::less<>> table = {
        {"i32.add", Opcode::I32Add},     {"i32.sub", Opcode::I32Sub},
        {"i32.mul", Opcode::I32Mul},     {"i32.div_s", Opcode::I32DivS},
        {"i32.rem_s", Opcode::I32RemS},  {"i32.and", Opcode::I32And},
        {"i32.or", Opcode::I32Or},       {"i32.xor", Opcode::I32Xor},
        {"i32.shl", Opcode::I32Shl},     {"i32.shr_s", Opcode::I32ShrS},
        {"i32.shr_u", Opcode::I32ShrU},  {"i32.eqz", Opcode::I32Eqz},
        {"i32.eq", Opcode::I32Eq},       {"i32.ne", Opcode::I32Ne},
        {"i32.lt_s", Opcode::I32LtS},    {"i32.gt_s", Opcode::I32GtS},
        {"i32.le_s", Opcode::I32LeS},    {"i32.ge_s", Opcode::I32GeS},
        {"drop", Opcode::Drop},          {"select", Opcode::Select},
        {"nop", Opcode::Nop},            {"block", Opcode::Block},
        {"loop", Opcode::Loop},          {"if", Opcode::If},
        {"else", Opcode::Else},          {"end", Opcode::End},
        {"return", Opcode::Return},
    };
    return table;
}

class Parser {
public:
    explicit Parser(std::string_view src) : lexer_(src) { shift(); }

    Module parse_module() {
        expect(Token::Kind::LParen);
        expect_atom("module");
        Module m;
        while (cur_.kind == Token::Kind::LParen) parse_field(m);
        expect(Token::Kind::RParen);
        if (cur_.kind != Token::Kind::End)
            throw ParseError("trailing input after module", cur_.loc);
        resolve(m);
        return m;
    }

private:
    void shift() { cur_ = lexer_.next(); }

    Token expect(Token::Kind kind) {
        if (cur_.kind != kind) throw ParseError("unexpected token '" + cur_.text + "'", cur_.loc);
        Token t = cur_;
        shift();
        return t;
    }

    void expect_atom(std::string_view text) {
        if (cur_.kind != Token::Kind::Atom || cur_.text != text)
            throw ParseError("expected '" + std::string(text) + "', got '" + cur_.text + "'",
                             cur_.loc);
        shift();
    }

    std::string expect_id() {
        if (cur_.kind != Token::Kind::Atom || cur_.text.size() < 2 || cur_.text[0] != '$')
            throw ParseError("expected $identifier, got '" + cur_.text + "'", cur_.loc);
        std::string name = cur_.text.substr(1);
        shift();
        return name;
    }

    void parse_field(Module& m) {
        SourceLoc open = cur_.loc;
        expect(Token::Kind::LParen);
        if (cur_.kind != Token::Kind::Atom)
            throw ParseError("expected module field", cur_.loc);
        const std::string head = cur_.text;
        shift();
        if (head == "memory") {
            if (m.memory_pages) throw ParseError("duplicate memory declaration", open);
            Token n = expect(Token::Kind::Atom);
            m.memory_pages = parse_u32_mod(n.text, n.loc);
            expect(Token::Kind::RParen);
        } else if (head == "import") {
            Import imp;
            imp.module = expect(Token::Kind::String).text;
            imp.field = expect(Token::Kind::String).text;
            expect(Token::Kind::LParen);
            expect_atom("func");
            imp.local_name = expect_id();
            imp.type = parse_signature();
            expect(Token::Kind::RParen);
            expect(Token::Kind::RParen);
            m.imports.push_back(std::move(imp));
        } else if (head == "func") {
            m.functions.push_back(parse_func());
        } else if (head == "export") {
            Export e;
            Token name = expect(Token::Kind::String);
            e.name = name.text;
            expect(Token::Kind::LParen);
            expect_atom("func");
            e.func = expect_id();
            expect(Token::Kind::RParen);
            expect(Token::Kind::RParen);
            for (const auto& prev : m.exports)
                if (prev.name == e.name)
                    throw ParseError("duplicate export \"" + e.name + "\"", name.loc);
            m.exports.push_back(std::move(e));
        } else {
            throw ParseError("unknown module field '" + head + "'", open);
        }
    }

    FuncType parse_signature() {
        FuncType t;
        while (cur_.kind == Token::Kind::LParen) {
            Token open = cur_;
            shift();
            if (cur_.kind != Token::Kind::Atom) throw ParseError("expected param/result", cur_.loc);
            std::string head = cur_.text;
            if (head == "param") {
                shift();
                while (cur_.kind == Token::Kind::Atom) {
                    if (cur_.text != "i32")
                        throw ParseError("unsupported value type '" + cur_.text + "'", cur_.loc);
                    ++t.params;
                    shift();
                }
                expect(Token::Kind::RParen);
            } else if (head == "result") {
                shift();
                expect_atom("i32");
                if (t.result) throw ParseError("multiple results", open.loc);
                t.result = true;
                expect(Token::Kind::RParen);
            } else {
                // Not part of the signature; caller re-parses (locals / body).
                pending_open_ = open;
                return t;
            }
        }
        return t;
    }

    Function parse_func() {
        Function f;
        f.name = expect_id();
        f.type = parse_signature();
        // local groups
        for (;;) {
            Token open;
            bool had_pending = false;
            if (pending_open_) {
                open = *pending_open_;
                pending_open_.reset();
                had_pending = true;
            } else if (cur_.kind == Token::Kind::LParen) {
                open = cur_;
                shift();
            } else {
                break;
            }
            if (cur_.kind == Token::Kind::Atom && cur_.text == "local") {
                shift();
                while (cur_.kind == Token::Kind::Atom) {
                    if (cur_.text != "i32")
                        throw ParseError("unsupported value type '" + cur_.text + "'", cur_.loc);
                    ++f.locals;
                    shift();
                }
                expect(Token::Kind::RParen);
            } else {
                (void)had_pending;
                throw ParseError("unexpected '(' in function body (instructions are flat)",
                                 open.loc);
            }
        }
        // flat instruction list
        while (cur_.kind == Token::Kind::Atom) f.body.push_back(parse_instr());
        expect(Token::Kind::RParen);
        return f;
    }

    Instr parse_instr() {
        Token t = cur_;
        shift();
        const std::string& name = t.text;
        Instr ins;
        ins.loc = t.loc;
        auto& plain = plain_opcodes();
        if (auto it = plain.find(name); it != plain.end()) {
            ins.op = it->second;
            return ins;
        }
        if (name == "i32.const") {
            Token v = expect(Token::Kind::Atom);
            ins.op = Opcode::I32Const;
            ins.imm = parse_u32_mod(v.text, v.loc);
            return ins;
        }
        if (name == "local.get" || name == "local.set" || name == "local.tee") {
            Token v = expect(Token::Kind::Atom);
            ins.op = name == "local.get"   ? Opcode::LocalGet
                     : name == "local.set" ? Opcode::LocalSet
                                           : Opcode::LocalTee;
            ins.imm = parse_index(v);
            return ins;
        }
        if (name == "br" || name == "br_if") {
            Token v = expect(Token::Kind::Atom);
            ins.op = name == "br" ? Opcode::Br : Opcode::BrIf;
            ins.imm = parse_index(v);
            return ins;
        }
        if (name == "call") {
            if (cur_.kind != Token::Kind::Atom)
                throw ParseError("call expects a target", cur_.loc);
            Token v = cur_;
            shift();
            ins.op = Opcode::Call;
            if (v.text.size() >= 2 && v.text[0] == '$') {
                ins.sym = v.text.substr(1);
            } else if (is_integer_atom(v.text)) {
                // numeric index into the import+function space, resolved later
                ins.imm = parse_index(v);
                ins.sym = "\x01";
            } else {
                throw ParseError("call expects $name or index", v.loc);
            }
            return ins;
        }
        if (name == "i32.load" || name == "i32.store") {
            ins.op = name == "i32.load" ? Opcode::I32Load : Opcode::I32Store;
            if (cur_.kind == Token::Kind::Atom && cur_.text.rfind("offset=", 0) == 0) {
                std::string_view num = std::string_view(cur_.text).substr(7);
                ins.imm = parse_u32_mod(num, cur_.loc);
                shift();
            }
            return ins;
        }
        throw ParseError("unknown opcode '" + name + "'", t.loc);
    }

    uint32_t parse_index(const Token& t) {
        if (!is_integer_atom(t.text) || t.text[0] == '-')
            throw ParseError("expected non-negative index, got '" + t.text + "'", t.loc);
        uint64_t v = 0;
        for (char c : t.text) {
            v = v * 10 + static_cast<uint64_t>(c - '0');
            if (v > 0xFFFFFFFFull) throw ParseError("index out of range", t.loc);
        }
        return static_cast<uint32_t>(v);
    }

    // Name resolution: unique names, numeric call targets, export/call targets.
    void resolve(Module& m) {
        std::set<std::string> names;
        std::vector<std::string> index_space;  // imports first, then functions
        for (const auto& i : m.imports) {
            if (!names.insert(i.local_name).second)
                throw ParseError("duplicate name $" + i.local_name, {});
            index_space.push_back(i.local_name);
        }
        for (const auto& f : m.functions) {
            if (!names.insert(f.name).second) throw ParseError("duplicate name $" + f.name, {});
            index_space.push_back(f.name);
        }
        for (auto& f : m.functions) {
            for (auto& ins : f.body) {
                if (ins.op != Opcode::Call) continue;
                if (!ins.sym.empty() && ins.sym[0] == '\x01') {
                    if (ins.imm >= index_space.size())
                        throw ParseError("unresolved index " + std::to_string(ins.imm), ins.loc);
                    ins.sym = index_space[ins.imm];
                    ins.imm = 0;
                } else if (!names.count(ins.sym)) {
                    throw ParseError("unresolved name $" + ins.sym, ins.loc);
                }
            }
        }
        for (const auto& e : m.exports) {
            if (!names.count(e.func))
                throw ParseError("unresolved name $" + e.func + " in export \"" + e.name + "\"",
                                 {});
        }
    }

    Lexer lexer_;
    Token cur_;
    std::optional<Token> pending_open_;
};

} // namespace detail

inline Module parse_module(std::string_view text) {
    return detail::Parser(text).parse_module();
}

} // namespace watmv
