#include "hetplace/graph.hpp"

#include <algorithm>
#include <queue>
#include <set>

#include "hetplace/errors.hpp"

namespace hetplace {

std::string_view to_string(NodeTag tag) {
    switch (tag) {
        case NodeTag::Plain: return "plain";
        case NodeTag::Fused: return "fused";
        case NodeTag::Bound: return "bound";
    }
    return "plain";
}

NodeTag node_tag_from_string(std::string_view s) {
    if (s == "plain") return NodeTag::Plain;
    if (s == "fused") return NodeTag::Fused;
    if (s == "bound") return NodeTag::Bound;
    throw ParseError("unknown node tag '" + std::string(s) + "'");
}

std::vector<std::string> OpNode::type_sequence() const {
    std::vector<std::string> out;
    std::string_view rest = op_type;
    for (;;) {
        auto pos = rest.find(kFusedTypeSeparator);
        if (pos == std::string_view::npos) {
            out.emplace_back(rest);
            break;
        }
        out.emplace_back(rest.substr(0, pos));
        rest.remove_prefix(pos + kFusedTypeSeparator.size());
    }
    return out;
}

std::string join_types(std::span<const std::string> types) {
    std::string out;
    for (std::size_t i = 0; i < types.size(); ++i) {
        if (i) out += kFusedTypeSeparator;
        out += types[i];
    }
    return out;
}

CompGraph::CompGraph(std::vector<OpNode> nodes, std::vector<FlowEdge> edges)
    : nodes_(std::move(nodes)), edges_(std::move(edges)) {
    std::ranges::sort(nodes_, {}, &OpNode::id);
    for (std::size_t i = 0; i < nodes_.size(); ++i) {
        auto& n = nodes_[i];
        if (!index_.emplace(n.id, i).second) throw Error("duplicate node id " + std::to_string(n.id));
        if (n.members.empty()) n.members.push_back(n.id);
        std::vector<NodeId> sorted = n.members;
        std::ranges::sort(sorted);
        if (std::ranges::adjacent_find(sorted) != sorted.end())
            throw Error("node " + std::to_string(n.id) + " has duplicate members");
        for (const auto& [dev, t] : n.compute_time)
            if (!(t >= 0.0)) throw Error("node " + std::to_string(n.id) + " has a negative compute time");
    }
    succ_.resize(nodes_.size());
    pred_.resize(nodes_.size());
    std::set<std::pair<NodeId, NodeId>> seen;
    for (const auto& e : edges_) {
        if (!contains(e.src)) throw DanglingEdgeError(e.src, e.dst, e.src);
        if (!contains(e.dst)) throw DanglingEdgeError(e.src, e.dst, e.dst);
        if (e.src == e.dst) throw Error("self loop on node " + std::to_string(e.src));
        if (!seen.emplace(e.src, e.dst).second)
            throw Error("parallel edge (" + std::to_string(e.src) + "," + std::to_string(e.dst) + ")");
        succ_[index_.at(e.src)].push_back(e.dst);
        pred_[index_.at(e.dst)].push_back(e.src);
    }
    for (auto& v : succ_) std::ranges::sort(v);
    for (auto& v : pred_) std::ranges::sort(v);
}

std::size_t CompGraph::index_of(NodeId id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw Error("unknown node " + std::to_string(id));
    return it->second;
}

const OpNode& CompGraph::node(NodeId id) const { return nodes_[index_of(id)]; }

std::span<const NodeId> CompGraph::successors(NodeId id) const { return succ_[index_of(id)]; }

std::span<const NodeId> CompGraph::predecessors(NodeId id) const { return pred_[index_of(id)]; }

const FlowEdge* CompGraph::find_edge(NodeId src, NodeId dst) const {
    for (const auto& e : edges_)
        if (e.src == src && e.dst == dst) return &e;
    return nullptr;
}

bool CompGraph::is_weakly_connected() const {
    if (nodes_.empty()) return true;
    std::vector<bool> seen(nodes_.size(), false);
    std::vector<std::size_t> stack{0};
    seen[0] = true;
    std::size_t count = 1;
    while (!stack.empty()) {
        auto i = stack.back();
        stack.pop_back();
        for (const auto* adj : {&succ_[i], &pred_[i]}) {
            for (NodeId n : *adj) {
                auto j = index_.at(n);
                if (!seen[j]) {
                    seen[j] = true;
                    ++count;
                    stack.push_back(j);
                }
            }
        }
    }
    return count == nodes_.size();
}

bool AugGraph::is_flow(NodeId id) const {
    return std::ranges::any_of(flow_nodes, [id](const FlowNode& f) { return f.id == id; });
}

const FlowNode& AugGraph::flow(NodeId id) const {
    for (const auto& f : flow_nodes)
        if (f.id == id) return f;
    throw Error("unknown flow node " + std::to_string(id));
}

namespace {

// Dense adjacency over arbitrary ids, shared by the closure routines.
struct Digraph {
    std::vector<NodeId> ids;  // ascending
    std::unordered_map<NodeId, std::size_t> index;
    std::vector<std::vector<std::size_t>> succ;

    explicit Digraph(std::vector<NodeId> node_ids) : ids(std::move(node_ids)) {
        std::ranges::sort(ids);
        for (std::size_t i = 0; i < ids.size(); ++i) index.emplace(ids[i], i);
        succ.resize(ids.size());
    }

    void add(NodeId a, NodeId b) { succ[index.at(a)].push_back(index.at(b)); }

    void finish() {
        for (auto& s : succ) std::ranges::sort(s);
    }

    std::optional<std::vector<NodeId>> cycle() const {
        enum Color : std::uint8_t { White, Gray, Black };
        std::vector<Color> color(ids.size(), White);
        std::vector<std::size_t> parent(ids.size(), SIZE_MAX);
        for (std::size_t root = 0; root < ids.size(); ++root) {
            if (color[root] != White) continue;
            std::vector<std::pair<std::size_t, std::size_t>> stack{{root, 0}};
            color[root] = Gray;
            while (!stack.empty()) {
                auto& [u, next] = stack.back();
                if (next < succ[u].size()) {
                    auto v = succ[u][next++];
                    if (color[v] == Gray) {
                        std::vector<NodeId> cyc;
                        for (auto w = u; w != v; w = parent[w]) cyc.push_back(ids[w]);
                        cyc.push_back(ids[v]);
                        std::ranges::reverse(cyc);
                        return cyc;
                    }
                    if (color[v] == White) {
                        color[v] = Gray;
                        parent[v] = u;
                        stack.emplace_back(v, 0);
                    }
                } else {
                    color[u] = Black;
                    stack.pop_back();
                }
            }
        }
        return std::nullopt;
    }

    std::vector<std::size_t> topo() const {
        std::vector<std::size_t> indeg(ids.size(), 0);
        for (const auto& s : succ)
            for (auto v : s) ++indeg[v];
        std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
        for (std::size_t i = 0; i < ids.size(); ++i)
            if (indeg[i] == 0) ready.push(i);
        std::vector<std::size_t> order;
        order.reserve(ids.size());
        while (!ready.empty()) {
            auto u = ready.top();
            ready.pop();
            order.push_back(u);
            for (auto v : succ[u])
                if (--indeg[v] == 0) ready.push(v);
        }
        if (order.size() != ids.size()) throw CycleError(*cycle());
        return order;
    }

    SuccClosure closure() const {
        const std::size_t words = (ids.size() + 63) / 64;
        std::vector<std::vector<std::uint64_t>> rows(ids.size(), std::vector<std::uint64_t>(words, 0));
        auto order = topo();
        for (auto it = order.rbegin(); it != order.rend(); ++it) {
            auto u = *it;
            for (auto v : succ[u]) {
                rows[u][v / 64] |= std::uint64_t{1} << (v % 64);
                for (std::size_t w = 0; w < words; ++w) rows[u][w] |= rows[v][w];
            }
        }
        return SuccClosure(ids, std::move(rows));
    }
};

Digraph to_digraph(const CompGraph& g) {
    std::vector<NodeId> ids;
    for (const auto& n : g.nodes()) ids.push_back(n.id);
    Digraph d(std::move(ids));
    for (const auto& e : g.edges()) d.add(e.src, e.dst);
    d.finish();
    return d;
}

}  // namespace

SuccClosure::SuccClosure(std::vector<NodeId> ids, std::vector<std::vector<std::uint64_t>> rows)
    : ids_(std::move(ids)), rows_(std::move(rows)) {
    for (std::size_t i = 0; i < ids_.size(); ++i) index_.emplace(ids_[i], i);
}

std::size_t SuccClosure::index_of(NodeId id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw Error("node " + std::to_string(id) + " not in closure");
    return it->second;
}

bool SuccClosure::reaches(NodeId from, NodeId to) const {
    auto j = index_of(to);
    return (rows_[index_of(from)][j / 64] >> (j % 64)) & 1U;
}

std::vector<NodeId> SuccClosure::descendants(NodeId id) const {
    const auto& row = rows_[index_of(id)];
    std::vector<NodeId> out;
    for (std::size_t j = 0; j < ids_.size(); ++j)
        if ((row[j / 64] >> (j % 64)) & 1U) out.push_back(ids_[j]);
    return out;
}

std::optional<std::vector<NodeId>> find_cycle(const CompGraph& g) { return to_digraph(g).cycle(); }

void validate_dag(const CompGraph& g) {
    if (auto cyc = find_cycle(g)) throw CycleError(std::move(*cyc));
}

std::vector<NodeId> topo_order(const CompGraph& g) {
    auto d = to_digraph(g);
    std::vector<NodeId> out;
    for (auto i : d.topo()) out.push_back(d.ids[i]);
    return out;
}

SuccClosure succ_closure(const CompGraph& g) { return to_digraph(g).closure(); }

SuccClosure succ_closure(const AugGraph& aug) {
    std::vector<NodeId> ids;
    for (const auto& n : aug.op_nodes) ids.push_back(n.id);
    for (const auto& f : aug.flow_nodes) ids.push_back(f.id);
    Digraph d(std::move(ids));
    for (const auto& [a, b] : aug.links) d.add(a, b);
    d.finish();
    return d.closure();
}

AugGraph augment(const CompGraph& g) {
    validate_dag(g);
    AugGraph aug;
    aug.op_nodes.assign(g.nodes().begin(), g.nodes().end());
    NodeId next = 0;
    for (const auto& n : g.nodes()) next = std::max(next, n.id);
    for (const auto& e : g.edges()) {
        const NodeId q = ++next;
        aug.flow_nodes.push_back({q, e.src, e.dst, e.payload_bytes});
        aug.links.emplace_back(e.src, q);
        aug.links.emplace_back(q, e.dst);
    }
    return aug;
}

CompGraph contract(const AugGraph& aug) {
    std::vector<FlowEdge> edges;
    edges.reserve(aug.flow_nodes.size());
    for (const auto& f : aug.flow_nodes) edges.push_back({f.src, f.dst, f.payload_bytes});
    return CompGraph(aug.op_nodes, std::move(edges));
}

}  // namespace hetplace
