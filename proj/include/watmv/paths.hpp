#pragma once

#include <functional>
#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "watmv/callgraph.hpp"

namespace watmv {

using BigInt = boost::multiprecision::cpp_int;

struct PathCount {
    BigInt value;
    uint32_t budget = 0;

    std::string decimal() const { return value.str(); }
};

namespace detail {

// Per-node generating polynomial: coefficient k = number of distinct bounded
// call trees rooted there that traverse back edges exactly k times in total.
using Poly = std::vector<BigInt>;

inline Poly poly_one(size_t budget) {
    Poly p(budget + 1, 0);
    p[0] = 1;
    return p;
}

inline void poly_add(Poly& a, const Poly& b) {
    for (size_t i = 0; i < a.size(); ++i) a[i] += b[i];
}

inline Poly poly_mul(const Poly& a, const Poly& b) {
    Poly out(a.size(), 0);
    for (size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0) continue;
        for (size_t j = 0; i + j < a.size(); ++j) out[i + j] += a[i] * b[j];
    }
    return out;
}

// sum_{j=0..B} (x*A)^j, truncated: the choices for traversing one back edge
// 0..B times, each traversal spending one unit and re-rooting a subtree.
inline Poly poly_back_edge(const Poly& a, size_t budget) {
    Poly shifted(a.size(), 0);
    for (size_t i = 0; i + 1 < a.size(); ++i) shifted[i + 1] = a[i];
    Poly term = poly_one(budget);
    Poly sum = poly_one(budget);
    for (size_t j = 1; j <= budget; ++j) {
        term = poly_mul(term, shifted);
        poly_add(sum, term);
    }
    return sum;
}

} // namespace detail

// Counts the distinct bounded call trees rooted at the graph entry. A normal
// edge is expanded exactly once per visit of its caller; a dispatcher
// contributes the sum over its dispatch edges (one choice per visit); a back
// edge may be re-expanded as long as the tree's total back-edge budget B
// allows. Forward/dispatch edges must form a DAG, which the DFS back-edge
// marking of build_call_graph guarantees.
inline PathCount count_paths(const CallGraph& g, uint32_t back_budget) {
    using detail::Poly;
    if (g.find_node(g.entry) == nullptr)
        throw std::invalid_argument("count_paths: entry node missing");

    // adjacency restricted to nodes reachable from entry
    std::map<std::string, std::vector<const CallGraph::Edge*>> out_edges;
    for (const auto& e : g.edges) out_edges[e.caller].push_back(&e);
    std::set<std::string> reachable;
    {
        std::vector<std::string> work{g.entry};
        while (!work.empty()) {
            std::string n = work.back();
            work.pop_back();
            if (!reachable.insert(n).second) continue;
            for (const auto* e : out_edges[n]) work.push_back(e->callee);
        }
    }

    // reverse topological order over normal+dispatch edges
    std::vector<std::string> order;
    std::set<std::string> done, visiting;
    std::function<void(const std::string&)> topo = [&](const std::string& n) {
        if (done.count(n)) return;
        if (!visiting.insert(n).second)
            throw std::invalid_argument("count_paths: cycle without a back edge at $" + n);
        for (const auto* e : out_edges[n])
            if (e->kind != EdgeKind::Back && reachable.count(e->callee)) topo(e->callee);
        visiting.erase(n);
        done.insert(n);
        order.push_back(n);  // callees first
    };
    topo(g.entry);
    for (const auto& n : reachable)
        if (!done.count(n)) topo(n);  // nodes reachable only through back edges

    // degree-by-degree: coefficient k of a back-edge factor only needs
    // coefficients < k of its target, which the previous pass computed
    std::map<std::string, Poly> polys;
    for (uint32_t k = 0; k <= back_budget; ++k) {
        std::map<std::string, Poly> pass;
        for (const auto& name : order) {
            const CallGraph::Node* node = g.find_node(name);
            Poly p = detail::poly_one(back_budget);
            bool dispatcher = node != nullptr && node->type == NodeType::Dispatcher;
            if (dispatcher) {
                Poly sum(back_budget + 1, 0);
                for (const auto* e : out_edges[name]) poly_add(sum, pass.at(e->callee));
                p = sum;
            } else {
                for (const auto* e : out_edges[name]) {
                    if (e->kind == EdgeKind::Back) {
                        Poly target = polys.empty() ? detail::poly_one(back_budget)
                                                    : polys.at(e->callee);
                        p = detail::poly_mul(p, detail::poly_back_edge(target, back_budget));
                    } else {
                        p = detail::poly_mul(p, pass.at(e->callee));
                    }
                }
            }
            pass[name] = std::move(p);
        }
        polys = std::move(pass);
    }

    PathCount out;
    out.budget = back_budget;
    for (const auto& c : polys.at(g.entry)) out.value += c;
    return out;
}

} // namespace watmv
