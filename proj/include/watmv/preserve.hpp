#pragma once

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

#include "watmv/canonical.hpp"
#include "watmv/enumerate.hpp"
#include "watmv/passes.hpp"
#include "watmv/paths.hpp"

namespace watmv {

struct PreservationReport {
    struct PerFunction {
        std::string name;
        size_t variants_before = 0;  // variants only, the original adds one
        size_t unique_after = 0;     // canonical-hash groups of {original} + variants
    };
    std::vector<PerFunction> per_function;
    double pv = 1.0;  // preserved variants ratio
    double pp = 1.0;  // preserved paths ratio
    BigInt paths_before;
    BigInt paths_after;
};

namespace detail {

inline double big_ratio(const BigInt& num, const BigInt& den) {
    if (den == 0) return 1.0;
    using Float = boost::multiprecision::cpp_bin_float_quad;
    return static_cast<double>(Float(num) / Float(den));
}

// Keeps the first `keep` dispatch edges (callees sorted) of `dispatcher`
// and drops everything that becomes unreachable.
inline CallGraph shrink_dispatcher(const CallGraph& g, const std::string& dispatcher,
                                   size_t keep) {
    CallGraph out = g;
    std::vector<CallGraph::Edge> dispatch;
    out.edges.clear();
    for (const auto& e : g.edges) {
        if (e.caller == dispatcher && e.kind == EdgeKind::Dispatch)
            dispatch.push_back(e);
        else
            out.edges.push_back(e);
    }
    std::sort(dispatch.begin(), dispatch.end(),
              [](const auto& a, const auto& b) { return a.callee < b.callee; });
    if (keep > dispatch.size()) keep = dispatch.size();
    for (size_t i = 0; i < keep; ++i) out.edges.push_back(dispatch[i]);
    return out;
}

} // namespace detail

// Runs the optimizer over every diversified function and its variants,
// groups the results by canonical hash, and projects the collapse onto the
// call graph: each dispatcher keeps as many choices as distinct bodies
// survived. PV is the surviving fraction of bodies, PP the surviving
// fraction of bounded call paths.
inline PreservationReport preservation_report(const std::map<std::string, VariantSet>& sets,
                                              const PassSet& passes, const CallGraph& g,
                                              uint32_t back_budget) {
    PreservationReport report;
    size_t bodies_before = 0, bodies_after = 0;
    std::map<std::string, size_t> unique_after;
    for (const auto& [name, vs] : sets) {
        std::set<std::string> groups;
        groups.insert(canonical_hash(optimize_function(vs.original, passes)));
        for (const auto& v : vs.variants)
            groups.insert(canonical_hash(optimize_function(v, passes)));
        PreservationReport::PerFunction pf;
        pf.name = name;
        pf.variants_before = vs.variants.size();
        pf.unique_after = groups.size();
        bodies_before += vs.variants.size() + 1;
        bodies_after += pf.unique_after;
        unique_after[name] = pf.unique_after;
        report.per_function.push_back(std::move(pf));
    }
    report.pv = bodies_before == 0
                    ? 1.0
                    : static_cast<double>(bodies_after) / static_cast<double>(bodies_before);

    report.paths_before = count_paths(g, back_budget).value;
    CallGraph merged = g;
    for (const auto& n : g.nodes) {
        if (n.type != NodeType::Dispatcher) continue;
        std::string target = n.name;
        if (auto at = target.rfind(dispatcher_suffix);
            at != std::string::npos && at + std::string(dispatcher_suffix).size() == target.size())
            target.resize(at);
        auto it = unique_after.find(target);
        if (it == unique_after.end()) continue;
        merged = detail::shrink_dispatcher(merged, n.name, it->second);
    }
    report.paths_after = count_paths(merged, back_budget).value;
    report.pp = detail::big_ratio(report.paths_after, report.paths_before);
    return report;
}

} // namespace watmv
