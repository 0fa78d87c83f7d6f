#include "hetplace/profiles.hpp"

#include <algorithm>
#include <limits>
#include <set>

#include "hetplace/errors.hpp"

namespace hetplace {

Cluster::Cluster(std::vector<Device> devices, std::vector<Link> links) : devices_(std::move(devices)) {
    std::ranges::sort(devices_, {}, &Device::id);
    for (std::size_t i = 0; i < devices_.size(); ++i) {
        if (!index_.emplace(devices_[i].id, i).second)
            throw Error("duplicate device id " + std::to_string(devices_[i].id));
        if (devices_[i].mem_bytes == 0)
            throw Error("device " + std::to_string(devices_[i].id) + " has no memory");
    }
    std::map<std::pair<DeviceId, DeviceId>, double> directed;
    for (const auto& l : links) {
        if (!contains(l.src) || !contains(l.dst))
            throw Error("link (" + std::to_string(l.src) + "," + std::to_string(l.dst) + ") names an unknown device");
        if (l.src == l.dst) throw Error("self link on device " + std::to_string(l.src));
        if (!(l.bandwidth_Bps > 0.0)) throw Error("link bandwidth must be positive");
        if (!directed.emplace(std::pair{l.src, l.dst}, l.bandwidth_Bps).second)
            throw Error("duplicate link (" + std::to_string(l.src) + "," + std::to_string(l.dst) + ")");
    }
    auto explicit_links = directed;
    for (const auto& [key, bw] : explicit_links) directed.emplace(std::pair{key.second, key.first}, bw);
    for (const auto& [key, bw] : directed) links_.push_back({key.first, key.second, bw});
}

const Device& Cluster::device(DeviceId id) const { return devices_[index_of(id)]; }

std::size_t Cluster::index_of(DeviceId id) const {
    auto it = index_.find(id);
    if (it == index_.end()) throw Error("unknown device " + std::to_string(id));
    return it->second;
}

Bytes Cluster::total_memory() const {
    Bytes total = 0;
    for (const auto& d : devices_) total += d.mem_bytes;
    return total;
}

EffectiveMesh::EffectiveMesh(std::vector<DeviceId> ids, std::vector<double> bw)
    : ids_(std::move(ids)), bw_(std::move(bw)) {}

std::size_t EffectiveMesh::index_of(DeviceId id) const {
    auto it = std::ranges::lower_bound(ids_, id);
    if (it == ids_.end() || *it != id) throw Error("unknown device " + std::to_string(id));
    return static_cast<std::size_t>(it - ids_.begin());
}

double EffectiveMesh::bandwidth(DeviceId src, DeviceId dst) const {
    if (src == dst) throw Error("bandwidth is undefined for a device to itself");
    return bw_[index_of(src) * ids_.size() + index_of(dst)];
}

EffectiveMesh effective_bandwidth(const Cluster& c) {
    const std::size_t n = c.size();
    std::vector<DeviceId> ids;
    for (const auto& d : c.devices()) ids.push_back(d.id);

    std::vector<std::vector<std::pair<std::size_t, double>>> adj(n);
    for (const auto& l : c.links()) adj[c.index_of(l.src)].emplace_back(c.index_of(l.dst), l.bandwidth_Bps);

    // Max-bottleneck Dijkstra from every source.
    std::vector<double> bw(n * n, 0.0);
    for (std::size_t s = 0; s < n; ++s) {
        std::vector<double> best(n, 0.0);
        std::vector<bool> done(n, false);
        best[s] = std::numeric_limits<double>::infinity();
        for (;;) {
            std::size_t u = n;
            for (std::size_t i = 0; i < n; ++i)
                if (!done[i] && best[i] > 0.0 && (u == n || best[i] > best[u])) u = i;
            if (u == n) break;
            done[u] = true;
            for (auto [v, w] : adj[u]) best[v] = std::max(best[v], std::min(best[u], w));
        }
        for (std::size_t t = 0; t < n; ++t)
            if (t != s) bw[s * n + t] = best[t];
    }

    std::vector<std::pair<DeviceId, DeviceId>> unreachable;
    for (std::size_t s = 0; s < n; ++s)
        for (std::size_t t = 0; t < n; ++t)
            if (s != t && bw[s * n + t] <= 0.0) unreachable.emplace_back(ids[s], ids[t]);
    if (!unreachable.empty()) throw DisconnectedCluster(std::move(unreachable));
    return EffectiveMesh(std::move(ids), std::move(bw));
}

Seconds comm_time(Bytes payload_bytes, DeviceId src, DeviceId dst, const EffectiveMesh& mesh) {
    if (src == dst) return 0.0;
    return static_cast<double>(payload_bytes) / mesh.bandwidth(src, dst);
}

void CostOverrides::set(std::vector<std::string> types, DeviceId device, Seconds seconds) {
    if (!(seconds >= 0.0)) throw Error("override time must be non-negative");
    table_[{std::move(types), device}] = seconds;
}

const Seconds* CostOverrides::find(const std::vector<std::string>& types, DeviceId device) const {
    auto it = table_.find({types, device});
    return it == table_.end() ? nullptr : &it->second;
}

Seconds fused_cost(std::span<const OpNode* const> parts, DeviceId device, const CostOverrides& overrides) {
    if (!overrides.empty()) {
        std::vector<std::string> types;
        for (const auto* p : parts) {
            auto seq = p->type_sequence();
            types.insert(types.end(), seq.begin(), seq.end());
        }
        if (const auto* t = overrides.find(types, device)) return *t;
    }
    Seconds total = 0.0;
    for (const auto* p : parts) {
        auto it = p->compute_time.find(device);
        if (it == p->compute_time.end()) throw MissingProfile(p->members.empty() ? p->id : p->members.front(), device);
        total += it->second;
    }
    return total;
}

Seconds fused_cost(const OpNode& node, DeviceId device, const CostOverrides& overrides) {
    const OpNode* parts[] = {&node};
    return fused_cost(parts, device, overrides);
}

}  // namespace hetplace
