#pragma once

#include <string>
#include <vector>

#include "watmv/ast.hpp"

namespace watmv {

struct Violation {
    std::string function;
    size_t offset = 0;  // instruction index within the body
    std::string rule;
    SourceLoc loc{};
};

namespace detail {

// Operand-stack typing with block/loop/if frames. Only i32 exists, so the
// stack is a height; frames carry an unreachable flag that makes dead code
// after br/return polymorphic, as in standard Wasm validation.
class FunctionChecker {
public:
    FunctionChecker(const Module& m, const Function& f, std::vector<Violation>& out)
        : mod_(m), fn_(f), out_(out) {}

    void run() {
        ctrl_.push_back({FrameKind::Func, 0, false});
        height_ = 0;
        for (offset_ = 0; offset_ < fn_.body.size(); ++offset_) {
            if (!step(fn_.body[offset_])) return;  // structural error, stop this function
        }
        if (ctrl_.size() != 1) {
            fail("unclosed block");
            return;
        }
        size_t want = fn_.type.result ? 1 : 0;
        if (!ctrl_.back().unreachable && height_ != want)
            fail(height_ > want ? "values left on stack at function end"
                                : "missing result at function end");
    }

private:
    enum class FrameKind { Func, Block, Loop, If, Else };

    struct Frame {
        FrameKind kind;
        size_t entry_height;
        bool unreachable;
    };

    void fail(const std::string& rule) {
        SourceLoc loc = offset_ < fn_.body.size() ? fn_.body[offset_].loc : SourceLoc{};
        out_.push_back({fn_.name, offset_, rule, loc});
    }

    bool pop() {
        Frame& f = ctrl_.back();
        if (height_ == f.entry_height) {
            if (f.unreachable) return true;  // polymorphic
            fail("stack underflow");
            return false;
        }
        --height_;
        return true;
    }

    void push() { ++height_; }

    void mark_unreachable() {
        Frame& f = ctrl_.back();
        height_ = f.entry_height;
        f.unreachable = true;
    }

    bool end_frame_height_ok() {
        const Frame& f = ctrl_.back();
        return f.unreachable || height_ == f.entry_height;
    }

    bool step(const Instr& ins) {
        switch (ins.op) {
            case Opcode::I32Const:
                push();
                return true;
            case Opcode::I32Add:
            case Opcode::I32Sub:
            case Opcode::I32Mul:
            case Opcode::I32DivS:
            case Opcode::I32RemS:
            case Opcode::I32And:
            case Opcode::I32Or:
            case Opcode::I32Xor:
            case Opcode::I32Shl:
            case Opcode::I32ShrS:
            case Opcode::I32ShrU:
            case Opcode::I32Eq:
            case Opcode::I32Ne:
            case Opcode::I32LtS:
            case Opcode::I32GtS:
            case Opcode::I32LeS:
            case Opcode::I32GeS:
                if (!pop() || !pop()) return false;
                push();
                return true;
            case Opcode::I32Eqz:
                if (!pop()) return false;
                push();
                return true;
            case Opcode::Drop:
                return pop();
            case Opcode::Select:
                if (!pop() || !pop() || !pop()) return false;
                push();
                return true;
            case Opcode::Nop:
                return true;
            case Opcode::LocalGet:
            case Opcode::LocalSet:
            case Opcode::LocalTee:
                if (ins.imm >= fn_.total_locals()) {
                    fail("local index out of range");
                    return false;
                }
                if (ins.op == Opcode::LocalGet) {
                    push();
                } else if (ins.op == Opcode::LocalSet) {
                    if (!pop()) return false;
                }  // tee: pop+push, net zero, but still needs a value
                if (ins.op == Opcode::LocalTee) {
                    if (!pop()) return false;
                    push();
                }
                return true;
            case Opcode::Call: {
                const FuncType* t = mod_.callee_type(ins.sym);
                if (t == nullptr) {
                    fail("unresolved callee $" + ins.sym);
                    return false;
                }
                for (uint32_t i = 0; i < t->params; ++i)
                    if (!pop()) return false;
                if (t->result) push();
                return true;
            }
            case Opcode::Block:
                ctrl_.push_back({FrameKind::Block, height_, false});
                return true;
            case Opcode::Loop:
                ctrl_.push_back({FrameKind::Loop, height_, false});
                return true;
            case Opcode::If:
                if (!pop()) return false;
                ctrl_.push_back({FrameKind::If, height_, false});
                return true;
            case Opcode::Else: {
                if (ctrl_.back().kind != FrameKind::If) {
                    fail("else outside if");
                    return false;
                }
                if (!end_frame_height_ok()) {
                    fail("then-arm leaves values on stack");
                    return false;
                }
                size_t entry = ctrl_.back().entry_height;
                ctrl_.back() = {FrameKind::Else, entry, false};
                height_ = entry;
                return true;
            }
            case Opcode::End: {
                if (ctrl_.size() == 1) {
                    fail("end without open block");
                    return false;
                }
                if (!end_frame_height_ok()) {
                    fail("block leaves values on stack");
                    return false;
                }
                height_ = ctrl_.back().entry_height;
                ctrl_.pop_back();
                return true;
            }
            case Opcode::Br:
            case Opcode::BrIf: {
                if (ins.op == Opcode::BrIf && !pop()) return false;
                if (ins.imm >= ctrl_.size()) {
                    fail("branch depth out of range");
                    return false;
                }
                // All frames are void-typed, so a branch carries no values.
                if (ins.op == Opcode::Br) mark_unreachable();
                return true;
            }
            case Opcode::Return:
                if (fn_.type.result && !pop()) return false;
                mark_unreachable();
                return true;
            case Opcode::I32Load:
            case Opcode::I32Store:
                if (!mod_.memory_pages) {
                    fail("no memory");
                    return false;
                }
                if (!pop()) return false;  // store: value, load: address
                if (ins.op == Opcode::I32Store) {
                    if (!pop()) return false;  // address
                } else {
                    push();
                }
                return true;
        }
        fail("unknown opcode");
        return false;
    }

    const Module& mod_;
    const Function& fn_;
    std::vector<Violation>& out_;
    std::vector<Frame> ctrl_;
    size_t height_ = 0;
    size_t offset_ = 0;
};

} // namespace detail

// Returns the empty list iff the module is valid.
inline std::vector<Violation> validate(const Module& m) {
    std::vector<Violation> out;
    // module-level invariants
    {
        std::vector<std::string> seen;
        for (const auto& e : m.exports) {
            for (const auto& s : seen)
                if (s == e.name) out.push_back({"", 0, "duplicate export \"" + e.name + "\""});
            seen.push_back(e.name);
            if (!m.has_name(e.func))
                out.push_back({"", 0, "export \"" + e.name + "\" targets unknown $" + e.func});
        }
    }
    for (const auto& f : m.functions) {
        detail::FunctionChecker(m, f, out).run();
        if (f.origin.kind == Origin::Kind::Dispatcher) {
            // dispatchers draw randomness before anything else
            bool ok = !f.body.empty() && f.body.front().op == Opcode::Call &&
                      m.find_import(f.body.front().sym) != nullptr;
            if (!ok) out.push_back({f.name, 0, "dispatcher body does not start with an import call"});
        }
    }
    return out;
}

inline bool is_valid(const Module& m) { return validate(m).empty(); }

} // namespace watmv
