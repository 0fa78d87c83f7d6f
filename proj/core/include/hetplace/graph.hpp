#pragma once

// Computation-graph data model: operator DAG, augmented DAG with flow nodes,
// and successor closures.

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hetplace/types.hpp"

namespace hetplace {

enum class NodeTag { Plain, Fused, Bound };

std::string_view to_string(NodeTag tag);
NodeTag node_tag_from_string(std::string_view s);

// Joins member op types in a fused node's op_type ("conv∘bn").
inline constexpr std::string_view kFusedTypeSeparator = "\xE2\x88\x98";

struct OpNode {
    NodeId id = 0;
    std::string op_type;
    Bytes mem_bytes = 0;
    std::map<DeviceId, Seconds> compute_time;
    // Original op ids; a plain node lists only itself.
    std::vector<NodeId> members;
    NodeTag tag = NodeTag::Plain;

    // Member op types in order; a plain node yields {op_type}.
    std::vector<std::string> type_sequence() const;

    friend bool operator==(const OpNode&, const OpNode&) = default;
};

std::string join_types(std::span<const std::string> types);

struct FlowEdge {
    NodeId src = 0;
    NodeId dst = 0;
    Bytes payload_bytes = 0;

    friend bool operator==(const FlowEdge&, const FlowEdge&) = default;
};

/// Weighted operator graph. Construction checks referential integrity
/// (unique ids, known endpoints, no self loops, no parallel edges) but not
/// acyclicity; use validate_dag for that. Immutable once built.
class CompGraph {
public:
    CompGraph() = default;
    CompGraph(std::vector<OpNode> nodes, std::vector<FlowEdge> edges);

    // Nodes in ascending id order.
    std::span<const OpNode> nodes() const noexcept { return nodes_; }
    // Edges in input order.
    std::span<const FlowEdge> edges() const noexcept { return edges_; }

    std::size_t num_nodes() const noexcept { return nodes_.size(); }
    std::size_t num_edges() const noexcept { return edges_.size(); }
    bool empty() const noexcept { return nodes_.empty(); }

    bool contains(NodeId id) const { return index_.contains(id); }
    const OpNode& node(NodeId id) const;
    std::size_t index_of(NodeId id) const;

    // Neighbours in ascending id order.
    std::span<const NodeId> successors(NodeId id) const;
    std::span<const NodeId> predecessors(NodeId id) const;

    const FlowEdge* find_edge(NodeId src, NodeId dst) const;

    bool is_weakly_connected() const;

    friend bool operator==(const CompGraph& a, const CompGraph& b) {
        return a.nodes_ == b.nodes_ && a.edges_ == b.edges_;
    }

private:
    std::vector<OpNode> nodes_;
    std::vector<FlowEdge> edges_;
    std::unordered_map<NodeId, std::size_t> index_;
    std::vector<std::vector<NodeId>> succ_;
    std::vector<std::vector<NodeId>> pred_;
};

// A data flow turned into a node of the augmented graph.
struct FlowNode {
    NodeId id = 0;
    NodeId src = 0;
    NodeId dst = 0;
    Bytes payload_bytes = 0;

    friend bool operator==(const FlowNode&, const FlowNode&) = default;
};

/// Augmented DAG: every edge (i,j) of a CompGraph becomes a flow node q
/// with unweighted links (i,q) and (q,j). Flow ids follow the largest op
/// id in edge input order.
struct AugGraph {
    std::vector<OpNode> op_nodes;
    std::vector<FlowNode> flow_nodes;
    std::vector<std::pair<NodeId, NodeId>> links;

    std::size_t num_nodes() const noexcept { return op_nodes.size() + flow_nodes.size(); }
    bool is_flow(NodeId id) const;
    const FlowNode& flow(NodeId id) const;
};

/// Strict descendants of every node (i is never in its own closure).
class SuccClosure {
public:
    SuccClosure() = default;
    SuccClosure(std::vector<NodeId> ids, std::vector<std::vector<std::uint64_t>> rows);

    bool reaches(NodeId from, NodeId to) const;
    bool related(NodeId a, NodeId b) const { return reaches(a, b) || reaches(b, a); }
    std::vector<NodeId> descendants(NodeId id) const;
    std::span<const NodeId> ids() const noexcept { return ids_; }

private:
    std::size_t index_of(NodeId id) const;

    std::vector<NodeId> ids_;
    std::unordered_map<NodeId, std::size_t> index_;
    std::vector<std::vector<std::uint64_t>> rows_;
};

// One witness cycle in traversal order, or nullopt for a DAG.
std::optional<std::vector<NodeId>> find_cycle(const CompGraph& g);

// Throws CycleError with a witness cycle.
void validate_dag(const CompGraph& g);

// Kahn order with ascending-id tie-break. Throws CycleError.
std::vector<NodeId> topo_order(const CompGraph& g);

SuccClosure succ_closure(const CompGraph& g);
SuccClosure succ_closure(const AugGraph& g);

AugGraph augment(const CompGraph& g);

// Inverse of augment: each flow node collapses back into an edge.
CompGraph contract(const AugGraph& aug);

}  // namespace hetplace
