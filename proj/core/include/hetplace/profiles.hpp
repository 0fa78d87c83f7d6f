#pragma once

// Device clusters, effective full-mesh bandwidth, and operator cost data.

#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "hetplace/graph.hpp"
#include "hetplace/types.hpp"

namespace hetplace {

struct Device {
    DeviceId id = 0;
    Bytes mem_bytes = 0;

    friend bool operator==(const Device&, const Device&) = default;
};

struct Link {
    DeviceId src = 0;
    DeviceId dst = 0;
    double bandwidth_Bps = 0.0;

    friend bool operator==(const Link&, const Link&) = default;
};

/// Devices plus physically connected directed links. A link listed in only
/// one direction is mirrored; an explicit reverse entry keeps its own rate.
class Cluster {
public:
    Cluster() = default;
    Cluster(std::vector<Device> devices, std::vector<Link> links);

    std::span<const Device> devices() const noexcept { return devices_; }
    std::span<const Link> links() const noexcept { return links_; }
    std::size_t size() const noexcept { return devices_.size(); }

    const Device& device(DeviceId id) const;
    std::size_t index_of(DeviceId id) const;
    bool contains(DeviceId id) const { return index_.contains(id); }
    Bytes total_memory() const;

private:
    std::vector<Device> devices_;  // ascending id
    std::vector<Link> links_;      // both directions after mirroring
    std::unordered_map<DeviceId, std::size_t> index_;
};

/// Widest-path bandwidth for every ordered device pair.
class EffectiveMesh {
public:
    EffectiveMesh() = default;
    EffectiveMesh(std::vector<DeviceId> ids, std::vector<double> bw);

    // Effective bytes/sec from src to dst; src != dst.
    double bandwidth(DeviceId src, DeviceId dst) const;
    std::span<const DeviceId> devices() const noexcept { return ids_; }

private:
    std::size_t index_of(DeviceId id) const;

    std::vector<DeviceId> ids_;
    std::vector<double> bw_;  // row-major, diagonal unused
};

EffectiveMesh effective_bandwidth(const Cluster& c);

// payload / bw(src,dst); zero when src == dst.
Seconds comm_time(Bytes payload_bytes, DeviceId src, DeviceId dst, const EffectiveMesh& mesh);

/// Measured times for fused type sequences, keyed by (types, device).
class CostOverrides {
public:
    void set(std::vector<std::string> types, DeviceId device, Seconds seconds);
    const Seconds* find(const std::vector<std::string>& types, DeviceId device) const;
    bool empty() const noexcept { return table_.empty(); }
    std::size_t size() const noexcept { return table_.size(); }

    template <typename F>
    void for_each(F&& f) const {
        for (const auto& [key, secs] : table_) f(key.first, key.second, secs);
    }

private:
    std::map<std::pair<std::vector<std::string>, DeviceId>, Seconds> table_;
};

// Cost of running a group of nodes as one fused operator on `device`:
// the override for their concatenated type sequence if present, otherwise
// the sum of their own times. Throws MissingProfile.
Seconds fused_cost(std::span<const OpNode* const> parts, DeviceId device, const CostOverrides& overrides);

// Single-node form; a singleton returns its own profiled time unless overridden.
Seconds fused_cost(const OpNode& node, DeviceId device, const CostOverrides& overrides);

}  // namespace hetplace
