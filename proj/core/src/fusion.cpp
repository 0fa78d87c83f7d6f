#include "hetplace/fusion.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <unordered_map>

#include "hetplace/errors.hpp"

namespace hetplace {

FusionRuleSet::FusionRuleSet(std::vector<FusionRule> rules) : rules_(std::move(rules)) {
    std::ranges::sort(rules_, {}, &FusionRule::id);
    for (std::size_t i = 0; i < rules_.size(); ++i) {
        const auto& r = rules_[i];
        if (i > 0 && rules_[i - 1].id == r.id) throw Error("duplicate fusion rule id " + std::to_string(r.id));
        if (r.pattern.size() < 2) throw Error("fusion rule " + std::to_string(r.id) + " needs at least two types");
        for (const auto& t : r.pattern)
            if (t.empty()) throw Error("fusion rule " + std::to_string(r.id) + " has an empty op type");
        longest_ = std::max(longest_, r.pattern.size());
    }
}

FusionRuleSet FusionRuleSet::eigen_gpu_defaults() {
    return FusionRuleSet({
        {1, {"conv", "bn"}},
        {2, {"conv", "bn", "relu"}},
        {3, {"conv", "bn", "add", "relu"}},
    });
}

std::string_view to_string(ConnKind kind) {
    switch (kind) {
        case ConnKind::Direct: return "direct";
        case ConnKind::MultiOutputs: return "multi-outputs";
        case ConnKind::MultiInputs: return "multi-inputs";
    }
    return "direct";
}

std::string_view to_string(CoarsenAction action) {
    switch (action) {
        case CoarsenAction::Fuse: return "fuse";
        case CoarsenAction::Bind: return "bind";
        case CoarsenAction::RejectConnection: return "reject-connection";
        case CoarsenAction::RejectCycle: return "reject-cycle";
        case CoarsenAction::Finalize: return "finalize";
        case CoarsenAction::Release: return "release";
    }
    return "fuse";
}

ConnKind classify_connection(const CompGraph& g, NodeId src, NodeId dst) {
    if (!g.contains(src) || !g.contains(dst) || !g.find_edge(src, dst)) throw UnknownEdge(src, dst);
    if (g.successors(src).size() > 1) return ConnKind::MultiOutputs;
    if (g.predecessors(dst).size() > 1) return ConnKind::MultiInputs;
    return ConnKind::Direct;
}

bool is_valid_conn(const CompGraph& g, NodeId src, NodeId dst) {
    return classify_connection(g, src, dst) != ConnKind::MultiOutputs;
}

RuleMatch match_types(std::span<const std::string> types, const FusionRuleSet& rules) {
    std::optional<int> full;
    std::optional<int> partial;
    for (const auto& r : rules.rules()) {
        if (std::ranges::equal(r.pattern, types)) {
            if (!full) full = r.id;
        } else if (types.size() < r.pattern.size() && !partial) {
            auto hit = std::ranges::search(r.pattern, types);
            if (!hit.empty()) partial = r.id;
        }
    }
    if (partial) return {MatchKind::Partial, *partial, full};
    if (full) return {MatchKind::Full, *full, std::nullopt};
    return {};
}

RuleMatch match_rule(const OpNode& pred, const OpNode& succ, const FusionRuleSet& rules) {
    auto types = pred.type_sequence();
    auto tail = succ.type_sequence();
    types.insert(types.end(), tail.begin(), tail.end());
    return match_types(types, rules);
}

namespace {

// Builds the fused node for an ordered group of input nodes.
OpNode make_fused_node(NodeId id, std::span<const OpNode* const> parts, NodeTag tag, const CostOverrides& overrides) {
    OpNode n;
    n.id = id;
    n.tag = tag;
    std::vector<std::string> types;
    std::set<DeviceId> devices;
    for (const auto* p : parts) {
        auto seq = p->type_sequence();
        types.insert(types.end(), seq.begin(), seq.end());
        n.mem_bytes += p->mem_bytes;
        n.members.insert(n.members.end(), p->members.begin(), p->members.end());
        for (const auto& [k, t] : p->compute_time) devices.insert(k);
    }
    n.op_type = join_types(types);
    for (auto k : devices) n.compute_time[k] = fused_cost(parts, k, overrides);
    return n;
}

bool reaches_avoiding_edge(const CompGraph& g, NodeId from, NodeId to) {
    std::set<NodeId> seen;
    std::vector<NodeId> stack;
    for (auto s : g.successors(from))
        if (s != to) stack.push_back(s);
    while (!stack.empty()) {
        auto u = stack.back();
        stack.pop_back();
        if (u == to) return true;
        if (!seen.insert(u).second) continue;
        for (auto s : g.successors(u)) stack.push_back(s);
    }
    return false;
}

}  // namespace

FuseResult fuse(const CompGraph& g, NodeId pred, NodeId succ, const CostOverrides& overrides) {
    if (!g.contains(pred) || !g.contains(succ) || !g.find_edge(pred, succ)) throw UnknownEdge(pred, succ);
    if (reaches_avoiding_edge(g, pred, succ)) throw CycleCreation(pred, succ);

    NodeId next = 0;
    for (const auto& n : g.nodes()) next = std::max(next, n.id);
    const OpNode* parts[] = {&g.node(pred), &g.node(succ)};
    OpNode fused = make_fused_node(next + 1, parts, NodeTag::Fused, overrides);

    std::vector<OpNode> nodes;
    for (const auto& n : g.nodes())
        if (n.id != pred && n.id != succ) nodes.push_back(n);
    nodes.push_back(fused);

    auto remap = [&](NodeId id) { return (id == pred || id == succ) ? fused.id : id; };
    std::vector<FlowEdge> edges;
    for (const auto& e : g.edges()) {
        FlowEdge m{remap(e.src), remap(e.dst), e.payload_bytes};
        if (m.src == m.dst) continue;
        auto it = std::ranges::find_if(edges, [&](const FlowEdge& x) { return x.src == m.src && x.dst == m.dst; });
        if (it != edges.end())
            it->payload_bytes += m.payload_bytes;
        else
            edges.push_back(m);
    }
    return {CompGraph(std::move(nodes), std::move(edges)), std::move(fused)};
}

namespace {

// One coarsening pass over a partition of the input nodes into groups.
class CoarsenPass {
public:
    CoarsenPass(const CompGraph& g, const FusionRuleSet& rules, int pass, std::vector<CoarsenEvent>& trace)
        : g_(g), rules_(rules), pass_(pass), trace_(trace) {
        for (const auto& n : g.nodes()) {
            Group grp;
            grp.parts = {n.id};
            grp.types = n.type_sequence();
            grp.tag = n.tag == NodeTag::Fused ? NodeTag::Fused : NodeTag::Plain;
            grp.min_part = n.id;
            group_of_[n.id] = static_cast<int>(groups_.size());
            groups_.push_back(std::move(grp));
        }
        succ_.resize(groups_.size());
        pred_.resize(groups_.size());
        for (const auto& e : g.edges()) {
            succ_[group_of_.at(e.src)].insert(group_of_.at(e.dst));
            pred_[group_of_.at(e.dst)].insert(group_of_.at(e.src));
        }
        visited_.assign(groups_.size(), false);
    }

    // Returns the final partition: groups of input-node ids in member order
    // together with the tag each group ends with.
    std::vector<std::pair<std::vector<NodeId>, NodeTag>> run() {
        for (const auto& n : g_.nodes()) {
            if (!g_.predecessors(n.id).empty()) continue;
            dfs(group_of_.at(n.id));
        }
        for (const auto& n : g_.nodes()) dfs(group_of_.at(n.id));
        return unbind();
    }

private:
    struct Group {
        std::vector<NodeId> parts;
        std::vector<std::string> types;
        NodeTag tag = NodeTag::Plain;
        NodeId min_part = 0;
        bool alive = true;
    };

    void record(CoarsenAction action, const Group& grp, int rule) {
        trace_.push_back({action, grp.parts, grp.types, rule, pass_});
    }

    std::vector<int> sorted_succ(int gid) const {
        std::vector<int> out(succ_[gid].begin(), succ_[gid].end());
        std::ranges::sort(out, {}, [this](int x) { return groups_[x].min_part; });
        return out;
    }

    bool alternate_path(int from, int to) const {
        std::vector<bool> seen(groups_.size(), false);
        std::vector<int> stack;
        for (int s : succ_[from])
            if (s != to) stack.push_back(s);
        while (!stack.empty()) {
            int u = stack.back();
            stack.pop_back();
            if (u == to) return true;
            if (seen[u]) continue;
            seen[u] = true;
            for (int s : succ_[u]) stack.push_back(s);
        }
        return false;
    }

    int merge(int a, int b, NodeTag tag) {
        Group grp;
        grp.parts = groups_[a].parts;
        grp.parts.insert(grp.parts.end(), groups_[b].parts.begin(), groups_[b].parts.end());
        grp.types = groups_[a].types;
        grp.types.insert(grp.types.end(), groups_[b].types.begin(), groups_[b].types.end());
        grp.tag = tag;
        grp.min_part = std::min(groups_[a].min_part, groups_[b].min_part);
        const int id = static_cast<int>(groups_.size());
        groups_.push_back(std::move(grp));
        groups_[a].alive = groups_[b].alive = false;
        for (auto p : groups_[id].parts) group_of_[p] = id;

        std::set<int> succ;
        std::set<int> pred;
        for (int x : {a, b}) {
            succ.insert(succ_[x].begin(), succ_[x].end());
            pred.insert(pred_[x].begin(), pred_[x].end());
        }
        for (int x : {a, b}) {
            succ.erase(x);
            pred.erase(x);
        }
        for (int s : succ) {
            pred_[s].erase(a);
            pred_[s].erase(b);
            pred_[s].insert(id);
        }
        for (int p : pred) {
            succ_[p].erase(a);
            succ_[p].erase(b);
            succ_[p].insert(id);
        }
        succ_.push_back(std::move(succ));
        pred_.push_back(std::move(pred));
        visited_.push_back(true);
        return id;
    }

    std::optional<int> try_extend(int cur) {
        if (groups_[cur].tag == NodeTag::Fused) return std::nullopt;
        for (int s : sorted_succ(cur)) {
            if (groups_[s].tag == NodeTag::Fused) continue;
            // The pattern order must follow data flow from cur's last op into s's first.
            if (!g_.find_edge(groups_[cur].parts.back(), groups_[s].parts.front())) continue;
            auto types = groups_[cur].types;
            types.insert(types.end(), groups_[s].types.begin(), groups_[s].types.end());
            auto m = match_types(types, rules_);
            if (m.kind == MatchKind::None) continue;
            Group probe;
            probe.parts = groups_[cur].parts;
            probe.parts.insert(probe.parts.end(), groups_[s].parts.begin(), groups_[s].parts.end());
            probe.types = types;
            if (succ_[cur].size() != 1) {
                record(CoarsenAction::RejectConnection, probe, m.rule);
                continue;
            }
            if (alternate_path(cur, s)) {
                record(CoarsenAction::RejectCycle, probe, m.rule);
                continue;
            }
            const bool bind = m.kind == MatchKind::Partial;
            int id = merge(cur, s, bind ? NodeTag::Bound : NodeTag::Fused);
            record(bind ? CoarsenAction::Bind : CoarsenAction::Fuse, groups_[id], m.rule);
            return id;
        }
        return std::nullopt;
    }

    void dfs(int cur) {
        if (!groups_[cur].alive || visited_[cur]) return;
        visited_[cur] = true;
        while (auto next = try_extend(cur)) cur = *next;
        std::vector<NodeId> reps;
        for (int s : sorted_succ(cur)) reps.push_back(groups_[s].min_part);
        for (auto rep : reps) dfs(group_of_.at(rep));
    }

    bool connected(std::span<const NodeId> parts) const {
        std::set<NodeId> in(parts.begin(), parts.end());
        std::set<NodeId> seen{parts.front()};
        std::vector<NodeId> stack{parts.front()};
        while (!stack.empty()) {
            auto u = stack.back();
            stack.pop_back();
            for (auto v : g_.successors(u))
                if (in.contains(v) && seen.insert(v).second) stack.push_back(v);
            for (auto v : g_.predecessors(u))
                if (in.contains(v) && seen.insert(v).second) stack.push_back(v);
        }
        return seen.size() == in.size();
    }

    std::vector<std::pair<std::vector<NodeId>, NodeTag>> unbind() {
        std::vector<std::pair<std::vector<NodeId>, NodeTag>> out;
        for (auto& grp : groups_) {
            if (!grp.alive) continue;
            if (grp.tag != NodeTag::Bound) {
                out.emplace_back(grp.parts, grp.tag);
                continue;
            }
            // Keep the longest leading run of parts that is itself a complete rule.
            std::size_t keep = 0;
            int rule = 0;
            std::size_t types_seen = 0;
            std::vector<std::size_t> boundary;  // type count after each part
            for (auto p : grp.parts) {
                types_seen += g_.node(p).type_sequence().size();
                boundary.push_back(types_seen);
            }
            for (std::size_t n = grp.parts.size(); n >= 2; --n) {
                std::span<const std::string> head(grp.types.data(), boundary[n - 1]);
                auto m = match_types(head, rules_);
                const auto full = m.kind == MatchKind::Full ? std::optional<int>(m.rule) : m.full_rule;
                if (full && connected(std::span<const NodeId>(grp.parts.data(), n))) {
                    keep = n;
                    rule = *full;
                    break;
                }
            }
            if (keep > 0) {
                Group kept;
                kept.parts.assign(grp.parts.begin(), grp.parts.begin() + static_cast<std::ptrdiff_t>(keep));
                kept.types.assign(grp.types.begin(), grp.types.begin() + static_cast<std::ptrdiff_t>(boundary[keep - 1]));
                record(CoarsenAction::Finalize, kept, rule);
                out.emplace_back(kept.parts, NodeTag::Fused);
            }
            if (keep < grp.parts.size()) {
                Group released;
                released.parts.assign(grp.parts.begin() + static_cast<std::ptrdiff_t>(keep), grp.parts.end());
                released.types.assign(grp.types.begin() + static_cast<std::ptrdiff_t>(keep ? boundary[keep - 1] : 0),
                                      grp.types.end());
                record(CoarsenAction::Release, released, 0);
                for (auto p : released.parts) out.push_back({{p}, g_.node(p).tag});
            }
        }
        return out;
    }

    const CompGraph& g_;
    const FusionRuleSet& rules_;
    int pass_;
    std::vector<CoarsenEvent>& trace_;
    std::vector<Group> groups_;
    std::unordered_map<NodeId, int> group_of_;
    std::vector<std::set<int>> succ_;
    std::vector<std::set<int>> pred_;
    std::vector<bool> visited_;
};

CompGraph quotient(const CompGraph& g, std::vector<std::pair<std::vector<NodeId>, NodeTag>> groups,
                   const CostOverrides& overrides) {
    std::ranges::sort(groups, {}, [](const auto& grp) { return *std::ranges::min_element(grp.first); });
    std::unordered_map<NodeId, NodeId> new_id;
    std::vector<OpNode> nodes;
    for (std::size_t i = 0; i < groups.size(); ++i) {
        const auto& [parts, tag] = groups[i];
        const auto id = static_cast<NodeId>(i + 1);
        for (auto p : parts) new_id[p] = id;
        if (parts.size() == 1) {
            OpNode n = g.node(parts.front());
            n.id = id;
            nodes.push_back(std::move(n));
        } else {
            std::vector<const OpNode*> ptrs;
            for (auto p : parts) ptrs.push_back(&g.node(p));
            nodes.push_back(make_fused_node(id, ptrs, NodeTag::Fused, overrides));
        }
    }
    std::vector<FlowEdge> edges;
    std::map<std::pair<NodeId, NodeId>, std::size_t> pos;
    for (const auto& e : g.edges()) {
        FlowEdge m{new_id.at(e.src), new_id.at(e.dst), e.payload_bytes};
        if (m.src == m.dst) continue;
        auto [it, inserted] = pos.emplace(std::pair{m.src, m.dst}, edges.size());
        if (inserted)
            edges.push_back(m);
        else
            edges[it->second].payload_bytes += m.payload_bytes;
    }
    return CompGraph(std::move(nodes), std::move(edges));
}

}  // namespace

CoarsenResult coarsen(const CompGraph& g, const FusionRuleSet& rules, const CostOverrides& overrides) {
    validate_dag(g);
    CoarsenResult result;
    result.graph = g;
    for (;;) {
        ++result.passes;
        CoarsenPass pass(result.graph, rules, result.passes, result.trace);
        auto groups = pass.run();
        const bool changed = std::ranges::any_of(groups, [](const auto& grp) { return grp.first.size() > 1; });
        result.graph = quotient(result.graph, std::move(groups), overrides);
        if (!changed) break;
    }
    return result;
}

}  // namespace hetplace
