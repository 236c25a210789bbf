#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "watmv/ast.hpp"
#include "watmv/rng.hpp"
#include "watmv/sha256.hpp"
#include "watmv/validate.hpp"

namespace watmv {

struct HostConfig {
    uint64_t rng_seed = 1;
    uint64_t fuel_limit = 50'000'000;    // max executed instructions per invoke
    uint32_t call_depth_limit = 10'000;  // max nested frames
};

enum class Trap : uint8_t {
    None,
    DivByZero,
    Overflow,        // INT_MIN div_s -1
    MemOutOfBounds,
    CallDepth,
    FuelExhausted,
};

inline const char* trap_name(Trap t) {
    switch (t) {
        case Trap::None: return "none";
        case Trap::DivByZero: return "div-by-zero";
        case Trap::Overflow: return "overflow";
        case Trap::MemOutOfBounds: return "memory-out-of-bounds";
        case Trap::CallDepth: return "call-depth-exceeded";
        case Trap::FuelExhausted: return "fuel-exhausted";
    }
    return "?";
}

// One invocation's function-entry sequence plus its instruction-count fuel,
// the deterministic stand-in for wall-clock time.
struct Trace {
    std::vector<std::string> entries;
    uint64_t fuel_used = 0;
};

struct TraceHash {
    std::string digest;  // 64 lowercase hex chars

    friend bool operator==(const TraceHash&, const TraceHash&) = default;
};

// SHA-256 over the entries joined with "\n" (no trailing separator).
inline TraceHash hash_trace(const Trace& t) {
    Sha256 h;
    for (size_t i = 0; i < t.entries.size(); ++i) {
        if (i > 0) h.update("\n");
        h.update(t.entries[i]);
    }
    return {h.hex_digest()};
}

struct Outcome {
    Trap trap = Trap::None;
    std::optional<uint32_t> result;
    Trace trace;

    bool ok() const { return trap == Trap::None; }
};

class InstantiateError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Executes one module. Memory and RNG state are mutable, so an Instance is
// single-threaded; distinct Instances share the (immutable) Module freely.
class Instance {
public:
    Instance(const Module& m, HostConfig cfg) : mod_(m), cfg_(cfg), rng_(cfg.rng_seed) {
        for (const auto& imp : m.imports) {
            if (imp.module != "env" || imp.field != "random_u32" || imp.type.params != 0 ||
                !imp.type.result)
                throw InstantiateError("unsupported import " + imp.module + "." + imp.field);
        }
        if (auto v = validate(m); !v.empty())
            throw InstantiateError("module invalid: " + v.front().rule +
                                   (v.front().function.empty() ? "" : " in $" + v.front().function));
        memory_.assign(size_t(m.memory_pages.value_or(0)) * 65536, 0);
        for (size_t i = 0; i < m.functions.size(); ++i) {
            func_index_[m.functions[i].name] = static_cast<uint32_t>(i);
            controls_.push_back(build_control_map(m.functions[i]));
        }
    }

    const Module& module() const { return mod_; }

    void reset_memory() { std::fill(memory_.begin(), memory_.end(), 0); }

    size_t memory_bytes() const { return memory_.size(); }

    // Little-endian i32 at word index i, 0 beyond the end.
    uint32_t memory_word(size_t i) const {
        size_t at = i * 4;
        if (at + 4 > memory_.size()) return 0;
        return uint32_t(memory_[at]) | (uint32_t(memory_[at + 1]) << 8) |
               (uint32_t(memory_[at + 2]) << 16) | (uint32_t(memory_[at + 3]) << 24);
    }

    // Dynamic (caller, callee) pairs of the last invoke, for diagnostics.
    const std::vector<std::pair<std::string, std::string>>& last_call_pairs() const {
        return call_pairs_;
    }

    Outcome invoke(std::string_view endpoint, const std::vector<uint32_t>& args) {
        const Export* e = mod_.find_export(endpoint);
        if (e == nullptr)
            throw std::invalid_argument("endpoint not exported: " + std::string(endpoint));
        auto it = func_index_.find(e->func);
        if (it == func_index_.end())
            throw std::invalid_argument("endpoint resolves to an import");
        const Function& f = mod_.functions[it->second];
        if (args.size() != f.type.params)
            throw std::invalid_argument("arity mismatch: expected " +
                                        std::to_string(f.type.params) + " args");
        trace_ = Trace{};
        call_pairs_.clear();
        fuel_used_ = 0;
        Outcome out;
        try {
            auto r = run_function(it->second, args, 1);
            out.result = r;
        } catch (const TrapSignal& t) {
            out.trap = t.kind;
        }
        out.trace = trace_;
        out.trace.fuel_used = fuel_used_;
        return out;
    }

private:
    struct TrapSignal {
        Trap kind;
    };

    // For every block/loop/if: where its else (if any) and end live.
    struct ControlEntry {
        uint32_t else_at = 0;  // 0 = none (index 0 can never be an else target)
        uint32_t end_at = 0;
    };
    using ControlMap = std::map<uint32_t, ControlEntry>;

    static ControlMap build_control_map(const Function& f) {
        ControlMap map;
        std::vector<uint32_t> stack;
        for (uint32_t i = 0; i < f.body.size(); ++i) {
            switch (f.body[i].op) {
                case Opcode::Block:
                case Opcode::Loop:
                case Opcode::If:
                    stack.push_back(i);
                    break;
                case Opcode::Else:
                    if (stack.empty()) throw InstantiateError("else without if");
                    map[stack.back()].else_at = i;
                    break;
                case Opcode::End:
                    if (stack.empty()) throw InstantiateError("end without block");
                    map[stack.back()].end_at = i;
                    if (map[stack.back()].else_at != 0)
                        map[map[stack.back()].else_at].end_at = i;
                    stack.pop_back();
                    break;
                default:
                    break;
            }
        }
        if (!stack.empty()) throw InstantiateError("unclosed block");
        return map;
    }

    void burn_fuel() {
        if (++fuel_used_ > cfg_.fuel_limit) throw TrapSignal{Trap::FuelExhausted};
    }

    uint32_t mem_read(uint32_t addr, uint32_t offset) {
        uint64_t at = uint64_t(addr) + offset;
        if (at + 4 > memory_.size()) throw TrapSignal{Trap::MemOutOfBounds};
        return uint32_t(memory_[at]) | (uint32_t(memory_[at + 1]) << 8) |
               (uint32_t(memory_[at + 2]) << 16) | (uint32_t(memory_[at + 3]) << 24);
    }

    void mem_write(uint32_t addr, uint32_t offset, uint32_t value) {
        uint64_t at = uint64_t(addr) + offset;
        if (at + 4 > memory_.size()) throw TrapSignal{Trap::MemOutOfBounds};
        memory_[at] = uint8_t(value);
        memory_[at + 1] = uint8_t(value >> 8);
        memory_[at + 2] = uint8_t(value >> 16);
        memory_[at + 3] = uint8_t(value >> 24);
    }

    uint32_t host_random_u32() { return rng_.next_u32(); }

    std::optional<uint32_t> run_function(uint32_t index, const std::vector<uint32_t>& args,
                                         uint32_t depth) {
        if (depth > cfg_.call_depth_limit) throw TrapSignal{Trap::CallDepth};
        const Function& f = mod_.functions[index];
        trace_.entries.push_back(f.name);
        const ControlMap& ctrl = controls_[index];

        std::vector<uint32_t> locals(f.total_locals(), 0);
        std::copy(args.begin(), args.end(), locals.begin());
        std::vector<uint32_t> stack;
        struct Label {
            bool is_loop;
            uint32_t at;          // instruction index of block/loop/if
            size_t entry_height;  // operand stack height at entry
        };
        std::vector<Label> labels;

        auto pop = [&]() {
            uint32_t v = stack.back();
            stack.pop_back();
            return v;
        };

        uint32_t ip = 0;
        while (true) {
            if (ip >= f.body.size()) break;  // fall off the end
            const Instr& ins = f.body[ip];
            burn_fuel();
            switch (ins.op) {
                case Opcode::I32Const:
                    stack.push_back(ins.imm);
                    ++ip;
                    break;
                case Opcode::I32Add:
                case Opcode::I32Sub:
                case Opcode::I32Mul:
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
                case Opcode::I32GeS: {
                    uint32_t b = pop();
                    uint32_t a = pop();
                    stack.push_back(*eval_pure_binop(ins.op, a, b));
                    ++ip;
                    break;
                }
                case Opcode::I32DivS: {
                    uint32_t b = pop();
                    uint32_t a = pop();
                    if (b == 0) throw TrapSignal{Trap::DivByZero};
                    if (a == 0x80000000u && b == 0xFFFFFFFFu) throw TrapSignal{Trap::Overflow};
                    stack.push_back(
                        uint32_t(static_cast<int32_t>(a) / static_cast<int32_t>(b)));
                    ++ip;
                    break;
                }
                case Opcode::I32RemS: {
                    uint32_t b = pop();
                    uint32_t a = pop();
                    if (b == 0) throw TrapSignal{Trap::DivByZero};
                    if (a == 0x80000000u && b == 0xFFFFFFFFu) {
                        stack.push_back(0);  // defined in Wasm, unlike div_s
                    } else {
                        stack.push_back(
                            uint32_t(static_cast<int32_t>(a) % static_cast<int32_t>(b)));
                    }
                    ++ip;
                    break;
                }
                case Opcode::I32Eqz: {
                    uint32_t a = pop();
                    stack.push_back(a == 0 ? 1 : 0);
                    ++ip;
                    break;
                }
                case Opcode::LocalGet:
                    stack.push_back(locals[ins.imm]);
                    ++ip;
                    break;
                case Opcode::LocalSet:
                    locals[ins.imm] = pop();
                    ++ip;
                    break;
                case Opcode::LocalTee:
                    locals[ins.imm] = stack.back();
                    ++ip;
                    break;
                case Opcode::Drop:
                    pop();
                    ++ip;
                    break;
                case Opcode::Select: {
                    uint32_t c = pop();
                    uint32_t v2 = pop();
                    uint32_t v1 = pop();
                    stack.push_back(c != 0 ? v1 : v2);
                    ++ip;
                    break;
                }
                case Opcode::Nop:
                    ++ip;
                    break;
                case Opcode::Call: {
                    auto fit = func_index_.find(ins.sym);
                    if (fit == func_index_.end()) {
                        // host import: env.random_u32
                        stack.push_back(host_random_u32());
                        ++ip;
                        break;
                    }
                    const Function& callee = mod_.functions[fit->second];
                    std::vector<uint32_t> call_args(callee.type.params);
                    for (uint32_t i = callee.type.params; i > 0; --i) call_args[i - 1] = pop();
                    call_pairs_.emplace_back(f.name, callee.name);
                    auto r = run_function(fit->second, call_args, depth + 1);
                    if (callee.type.result) stack.push_back(*r);
                    ++ip;
                    break;
                }
                case Opcode::Block:
                case Opcode::Loop:
                    labels.push_back({ins.op == Opcode::Loop, ip, stack.size()});
                    ++ip;
                    break;
                case Opcode::If: {
                    uint32_t c = pop();
                    labels.push_back({false, ip, stack.size()});
                    const ControlEntry& ce = ctrl.at(ip);
                    if (c != 0) {
                        ++ip;
                    } else if (ce.else_at != 0) {
                        ip = ce.else_at + 1;
                    } else {
                        ip = ce.end_at;  // the end still executes and pops the label
                    }
                    break;
                }
                case Opcode::Else:
                    // end of a taken then-arm: skip to the matching end
                    ip = ctrl.at(ip).end_at;
                    break;
                case Opcode::End:
                    labels.pop_back();
                    ++ip;
                    break;
                case Opcode::Br:
                case Opcode::BrIf: {
                    if (ins.op == Opcode::BrIf) {
                        if (pop() == 0) {
                            ++ip;
                            break;
                        }
                    }
                    size_t target = labels.size() - 1 - ins.imm;
                    Label l = labels[target];
                    if (l.is_loop) {
                        labels.resize(target + 1);  // loop label survives, body re-entered
                        stack.resize(l.entry_height);
                        ip = l.at + 1;
                    } else {
                        labels.resize(target);
                        stack.resize(l.entry_height);
                        ip = ctrl.at(l.at).end_at + 1;
                    }
                    break;
                }
                case Opcode::Return:
                    if (f.type.result) return pop();
                    return std::nullopt;
                case Opcode::I32Load: {
                    uint32_t addr = pop();
                    stack.push_back(mem_read(addr, ins.imm));
                    ++ip;
                    break;
                }
                case Opcode::I32Store: {
                    uint32_t value = pop();
                    uint32_t addr = pop();
                    mem_write(addr, ins.imm, value);
                    ++ip;
                    break;
                }
            }
        }
        if (f.type.result) return pop();
        return std::nullopt;
    }

    const Module& mod_;
    HostConfig cfg_;
    SplitMix64 rng_;
    std::vector<uint8_t> memory_;
    std::map<std::string, uint32_t, std::less<>> func_index_;
    std::vector<ControlMap> controls_;
    Trace trace_;
    std::vector<std::pair<std::string, std::string>> call_pairs_;
    uint64_t fuel_used_ = 0;
};

// Convenience wrapper: fresh instance, one invocation.
inline Outcome run_once(const Module& m, std::string_view endpoint,
                        const std::vector<uint32_t>& args, HostConfig cfg = {}) {
    Instance inst(m, cfg);
    return inst.invoke(endpoint, args);
}

} // namespace watmv
