#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "watmv/ast.hpp"

namespace watmv {

enum class NodeType : uint8_t { Original, Variant, Dispatcher };
enum class EdgeKind : uint8_t { Normal, Dispatch, Back };

struct CallGraph {
    struct Node {
        std::string name;
        NodeType type = NodeType::Original;
    };
    struct Edge {
        std::string caller;
        std::string callee;
        EdgeKind kind = EdgeKind::Normal;

        friend bool operator==(const Edge&, const Edge&) = default;
    };

    std::vector<Node> nodes;  // DFS discovery order
    std::vector<Edge> edges;  // discovery order, one per (caller, callee)
    std::string entry;        // entry function name

    const Node* find_node(std::string_view name) const {
        for (const auto& n : nodes)
            if (n.name == name) return &n;
        return nullptr;
    }

    std::vector<const Edge*> out_edges(std::string_view caller) const {
        std::vector<const Edge*> out;
        for (const auto& e : edges)
            if (e.caller == caller) out.push_back(&e);
        return out;
    }

    bool has_edge(std::string_view caller, std::string_view callee) const {
        for (const auto& e : edges)
            if (e.caller == caller && e.callee == callee) return true;
        return false;
    }
};

inline NodeType node_type_of(const Function& f) {
    switch (f.origin.kind) {
        case Origin::Kind::Variant: return NodeType::Variant;
        case Origin::Kind::Dispatcher: return NodeType::Dispatcher;
        default: return NodeType::Original;
    }
}

namespace detail {

struct GraphBuilder {
    const Module& m;
    CallGraph g;
    std::set<std::string> visited;
    std::set<std::string> on_stack;
    std::set<std::pair<std::string, std::string>> edge_set;

    void visit(const Function& f) {
        visited.insert(f.name);
        on_stack.insert(f.name);
        g.nodes.push_back({f.name, node_type_of(f)});
        bool caller_is_dispatcher = f.origin.kind == Origin::Kind::Dispatcher;
        for (const auto& ins : f.body) {
            if (ins.op != Opcode::Call) continue;
            const Function* callee = m.find_function(ins.sym);
            if (callee == nullptr) continue;  // host import, not a graph node
            if (!edge_set.insert({f.name, ins.sym}).second) continue;
            EdgeKind kind = EdgeKind::Normal;
            if (caller_is_dispatcher)
                kind = EdgeKind::Dispatch;
            else if (on_stack.count(ins.sym))
                kind = EdgeKind::Back;
            g.edges.push_back({f.name, ins.sym, kind});
            if (!visited.count(ins.sym)) visit(*callee);
        }
        on_stack.erase(f.name);
    }
};

} // namespace detail

// Static call graph of everything reachable from the exported entry.
// Callees are visited in call-site order; an edge to a function currently on
// the DFS stack is a back edge.
inline CallGraph build_call_graph(const Module& m, std::string_view entry_export) {
    const Export* e = m.find_export(entry_export);
    if (e == nullptr)
        throw std::invalid_argument("entry not found: \"" + std::string(entry_export) + "\"");
    const Function* root = m.find_function(e->func);
    if (root == nullptr)
        throw std::invalid_argument("entry \"" + std::string(entry_export) +
                                    "\" resolves to an import");
    detail::GraphBuilder b{m, {}, {}, {}, {}};
    b.g.entry = root->name;
    b.visit(*root);
    return b.g;
}

// DOT rendering: originals yellow, dispatchers green, variants grey; back
// edges dashed. Node and edge order is sorted, so output is byte-stable.
inline std::string export_dot(const CallGraph& g) {
    std::vector<CallGraph::Node> nodes = g.nodes;
    std::sort(nodes.begin(), nodes.end(),
              [](const auto& a, const auto& b) { return a.name < b.name; });
    std::vector<CallGraph::Edge> edges = g.edges;
    std::sort(edges.begin(), edges.end(), [](const auto& a, const auto& b) {
        return std::tie(a.caller, a.callee) < std::tie(b.caller, b.callee);
    });
    std::string out = "digraph calls {\n  node [style=filled];\n";
    for (const auto& n : nodes) {
        const char* color = n.type == NodeType::Dispatcher ? "green"
                            : n.type == NodeType::Variant  ? "grey"
                                                           : "yellow";
        out += "  \"" + n.name + "\" [fillcolor=" + color + "];\n";
    }
    for (const auto& e : edges) {
        out += "  \"" + e.caller + "\" -> \"" + e.callee + "\"";
        if (e.kind == EdgeKind::Back) out += " [style=dashed]";
        out += ";\n";
    }
    out += "}\n";
    return out;
}

} // namespace watmv
