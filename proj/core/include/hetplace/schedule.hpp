#pragma once

// Placement and timed-schedule types shared by the solver, baselines,
// simulator and MILP extraction, plus the dense problem instance they
// all read from.

#include <map>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "hetplace/graph.hpp"
#include "hetplace/profiles.hpp"
#include "hetplace/types.hpp"

namespace hetplace {

struct Placement {
    std::map<NodeId, DeviceId> device_of;

    friend bool operator==(const Placement&, const Placement&) = default;
};

using Channel = std::pair<DeviceId, DeviceId>;

/// Start/complete time of one node of the augmented graph. Operators carry
/// their device; flows carry the channel when endpoints are split.
struct TaskTiming {
    NodeId node = 0;
    bool is_flow = false;
    Seconds start = 0.0;
    Seconds end = 0.0;
    std::optional<DeviceId> device;
    std::optional<Channel> channel;

    friend bool operator==(const TaskTiming&, const TaskTiming&) = default;
};

struct Schedule {
    std::vector<TaskTiming> tasks;  // ascending node id

    const TaskTiming& at(NodeId id) const;
    // Latest operator completion.
    Seconds makespan() const;

    friend bool operator==(const Schedule&, const Schedule&) = default;
};

/// Dense view of a (graph, cluster, mesh) triple. Operators are indexed
/// 0..n-1 in ascending id order, flows 0..m-1 in edge order, devices
/// 0..K-1 in ascending id order. Holds its own copies of the inputs.
class Instance {
public:
    // Throws CycleError, MissingCost.
    Instance(CompGraph graph, Cluster cluster, EffectiveMesh mesh);

    const CompGraph& graph() const noexcept { return graph_; }
    const Cluster& cluster() const noexcept { return cluster_; }
    const EffectiveMesh& mesh() const noexcept { return mesh_; }
    const AugGraph& aug() const noexcept { return aug_; }

    std::size_t num_ops() const noexcept { return op_ids_.size(); }
    std::size_t num_flows() const noexcept { return flows_.size(); }
    std::size_t num_devices() const noexcept { return device_ids_.size(); }

    NodeId op_id(std::size_t op) const { return op_ids_[op]; }
    std::size_t op_index(NodeId id) const { return graph_.index_of(id); }
    DeviceId device_id(std::size_t k) const { return device_ids_[k]; }
    std::size_t device_index(DeviceId id) const { return cluster_.index_of(id); }

    Seconds op_time(std::size_t op, std::size_t k) const { return op_time_[op * num_devices() + k]; }
    Seconds min_op_time(std::size_t op) const { return min_op_time_[op]; }
    Bytes op_mem(std::size_t op) const { return op_mem_[op]; }
    Bytes device_mem(std::size_t k) const { return device_mem_[k]; }

    struct Flow {
        NodeId id;
        std::size_t src;  // op index
        std::size_t dst;  // op index
        Bytes payload;
    };
    const Flow& flow(std::size_t q) const { return flows_[q]; }
    Seconds comm(std::size_t q, std::size_t from, std::size_t to) const;

    // Flow indices leaving / entering each op, in edge order.
    std::span<const std::size_t> out_flows(std::size_t op) const { return out_flows_[op]; }
    std::span<const std::size_t> in_flows(std::size_t op) const { return in_flows_[op]; }

    // Operator indices in topo_order.
    std::span<const std::size_t> topo() const noexcept { return topo_; }

    Placement to_placement(std::span<const std::size_t> assignment) const;
    std::vector<std::size_t> to_assignment(const Placement& p) const;

    // Overflow per device when the assignment exceeds memory; empty when it fits.
    std::vector<std::pair<DeviceId, Bytes>> memory_overflow(std::span<const std::size_t> assignment) const;

private:
    CompGraph graph_;
    Cluster cluster_;
    EffectiveMesh mesh_;
    AugGraph aug_;
    std::vector<NodeId> op_ids_;
    std::vector<DeviceId> device_ids_;
    std::vector<Seconds> op_time_;
    std::vector<Seconds> min_op_time_;
    std::vector<Bytes> op_mem_;
    std::vector<Bytes> device_mem_;
    std::vector<Flow> flows_;
    std::vector<double> bandwidth_;  // K x K effective, diagonal 0
    std::vector<std::vector<std::size_t>> out_flows_;
    std::vector<std::vector<std::size_t>> in_flows_;
    std::vector<std::size_t> topo_;
};

}  // namespace hetplace
