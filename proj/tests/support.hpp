#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "hetplace/graph.hpp"
#include "hetplace/profiles.hpp"
#include "hetplace/schedule.hpp"

namespace support {

using namespace hetplace;

inline OpNode op(NodeId id, std::string type, Bytes mem, std::map<DeviceId, Seconds> times) {
    OpNode n;
    n.id = id;
    n.op_type = std::move(type);
    n.mem_bytes = mem;
    n.compute_time = std::move(times);
    n.members = {id};
    return n;
}

// Same time on every device 1..K.
inline OpNode op_uniform(NodeId id, std::string type, Seconds t, int K = 1, Bytes mem = 1) {
    std::map<DeviceId, Seconds> times;
    for (DeviceId k = 1; k <= K; ++k) times[k] = t;
    return op(id, std::move(type), mem, times);
}

inline Cluster mesh_cluster(int K, double bw, Bytes mem = Bytes{1} << 40) {
    std::vector<Device> devices;
    std::vector<Link> links;
    for (DeviceId k = 1; k <= K; ++k) devices.push_back({k, mem});
    for (DeviceId a = 1; a <= K; ++a)
        for (DeviceId b = a + 1; b <= K; ++b) links.push_back({a, b, bw});
    return Cluster(devices, links);
}

inline CompGraph chain(const std::vector<std::string>& types, Seconds t = 1.0, int K = 1, Bytes payload = 0) {
    std::vector<OpNode> nodes;
    std::vector<FlowEdge> edges;
    for (std::size_t i = 0; i < types.size(); ++i) {
        const auto id = static_cast<NodeId>(i + 1);
        nodes.push_back(op_uniform(id, types[i], t, K));
        if (i > 0) edges.push_back({id - 1, id, payload});
    }
    return CompGraph(nodes, edges);
}

class Rand {
public:
    explicit Rand(std::uint64_t seed) : eng_(seed) {}
    double real(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(eng_); }
    int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(eng_); }
    bool chance(double p) { return real(0.0, 1.0) < p; }
    // Times on a coarse grid so sums stay exact and ties happen.
    double grid_time() { return integer(1, 16) * 0.25; }
    std::mt19937_64& engine() { return eng_; }

private:
    std::mt19937_64 eng_;
};

// Random DAG over ids 1..n with forward edges (i<j) only.
inline CompGraph random_dag(Rand& r, int n, int K, double edge_p, const std::vector<std::string>& types = {"op"}) {
    std::vector<OpNode> nodes;
    std::vector<FlowEdge> edges;
    for (NodeId i = 1; i <= n; ++i) {
        std::map<DeviceId, Seconds> t;
        for (DeviceId k = 1; k <= K; ++k) t[k] = r.grid_time();
        nodes.push_back(op(i, types[static_cast<std::size_t>(r.integer(0, static_cast<int>(types.size()) - 1))],
                           static_cast<Bytes>(r.integer(1, 10)), t));
    }
    for (NodeId i = 1; i <= n; ++i)
        for (NodeId j = i + 1; j <= n; ++j)
            if (r.chance(edge_p)) edges.push_back({i, j, static_cast<Bytes>(r.integer(0, 8) * 1'000'000)});
    return CompGraph(nodes, edges);
}

// Random connected cluster with devices 1..K. `tightness` in (0,1]: each
// device holds roughly total_mem * tightness; 1 lets any device hold all.
inline Cluster random_cluster(Rand& r, int K, Bytes total_mem, double tightness) {
    std::vector<Device> devices;
    for (DeviceId k = 1; k <= K; ++k) {
        const auto cap = static_cast<Bytes>(std::max(1.0, static_cast<double>(total_mem) * tightness * r.real(0.8, 1.6)));
        devices.push_back({k, std::max<Bytes>(cap, 10)});
    }
    std::vector<Link> links;
    for (DeviceId k = 2; k <= K; ++k) links.push_back({r.integer(1, k - 1), k, r.integer(1, 8) * 1e6});
    for (DeviceId a = 1; a <= K; ++a)
        for (DeviceId b = a + 1; b <= K; ++b)
            if (r.chance(0.5) &&
                std::none_of(links.begin(), links.end(), [&](const Link& l) { return l.src == a && l.dst == b; }) &&
                std::none_of(links.begin(), links.end(), [&](const Link& l) { return l.src == b && l.dst == a; }))
                links.push_back({a, b, r.integer(1, 8) * 1e6});
    return Cluster(devices, links);
}

inline Bytes total_mem(const CompGraph& g) {
    Bytes s = 0;
    for (const auto& n : g.nodes()) s += n.mem_bytes;
    return s;
}

}  // namespace support
