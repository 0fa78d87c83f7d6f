#include "hetplace/schedule.hpp"

#include <algorithm>
#include <limits>

#include "hetplace/errors.hpp"

namespace hetplace {

const TaskTiming& Schedule::at(NodeId id) const {
    auto it = std::ranges::lower_bound(tasks, id, {}, &TaskTiming::node);
    if (it == tasks.end() || it->node != id) throw Error("schedule has no entry for node " + std::to_string(id));
    return *it;
}

Seconds Schedule::makespan() const {
    Seconds m = 0.0;
    for (const auto& t : tasks)
        if (!t.is_flow) m = std::max(m, t.end);
    return m;
}

Instance::Instance(CompGraph graph, Cluster cluster, EffectiveMesh mesh)
    : graph_(std::move(graph)), cluster_(std::move(cluster)), mesh_(std::move(mesh)), aug_(augment(graph_)) {
    for (const auto& d : cluster_.devices()) {
        device_ids_.push_back(d.id);
        device_mem_.push_back(d.mem_bytes);
    }
    const std::size_t K = device_ids_.size();
    for (const auto& n : graph_.nodes()) {
        op_ids_.push_back(n.id);
        op_mem_.push_back(n.mem_bytes);
        Seconds lo = std::numeric_limits<Seconds>::infinity();
        for (auto dev : device_ids_) {
            auto it = n.compute_time.find(dev);
            if (it == n.compute_time.end()) throw MissingCost(n.id, dev);
            op_time_.push_back(it->second);
            lo = std::min(lo, it->second);
        }
        min_op_time_.push_back(K ? lo : 0.0);
    }
    out_flows_.resize(op_ids_.size());
    in_flows_.resize(op_ids_.size());
    for (const auto& f : aug_.flow_nodes) {
        const std::size_t q = flows_.size();
        flows_.push_back({f.id, graph_.index_of(f.src), graph_.index_of(f.dst), f.payload_bytes});
        out_flows_[flows_.back().src].push_back(q);
        in_flows_[flows_.back().dst].push_back(q);
    }
    bandwidth_.assign(K * K, 0.0);
    for (std::size_t a = 0; a < K; ++a)
        for (std::size_t b = 0; b < K; ++b)
            if (a != b) bandwidth_[a * K + b] = mesh_.bandwidth(device_ids_[a], device_ids_[b]);
    for (auto id : topo_order(graph_)) topo_.push_back(graph_.index_of(id));
}

Seconds Instance::comm(std::size_t q, std::size_t from, std::size_t to) const {
    if (from == to) return 0.0;
    return static_cast<double>(flows_[q].payload) / bandwidth_[from * num_devices() + to];
}

Placement Instance::to_placement(std::span<const std::size_t> assignment) const {
    Placement p;
    for (std::size_t i = 0; i < op_ids_.size(); ++i) p.device_of[op_ids_[i]] = device_ids_[assignment[i]];
    return p;
}

std::vector<std::size_t> Instance::to_assignment(const Placement& p) const {
    std::vector<std::size_t> a(op_ids_.size());
    for (std::size_t i = 0; i < op_ids_.size(); ++i) {
        auto it = p.device_of.find(op_ids_[i]);
        if (it == p.device_of.end()) throw Error("placement does not cover op " + std::to_string(op_ids_[i]));
        a[i] = device_index(it->second);
    }
    return a;
}

std::vector<std::pair<DeviceId, Bytes>> Instance::memory_overflow(std::span<const std::size_t> assignment) const {
    std::vector<Bytes> used(num_devices(), 0);
    for (std::size_t i = 0; i < assignment.size(); ++i) used[assignment[i]] += op_mem_[i];
    std::vector<std::pair<DeviceId, Bytes>> out;
    for (std::size_t k = 0; k < used.size(); ++k)
        if (used[k] > device_mem_[k]) out.emplace_back(device_ids_[k], used[k] - device_mem_[k]);
    return out;
}

}  // namespace hetplace
