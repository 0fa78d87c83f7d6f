#include "hetplace/synthetic.hpp"

#include <cmath>
#include <random>

#include "hetplace/errors.hpp"

namespace hetplace {

namespace {

// Draws from the engine's raw output so sequences are identical across
// standard libraries (distribution objects are implementation-defined).
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }
    bool chance(double p) { return uniform() < p; }
    std::size_t below(std::size_t n) { return static_cast<std::size_t>(uniform() * static_cast<double>(n)); }

    double log_uniform(double lo, double hi) {
        if (lo == hi) return lo;
        return std::exp(std::log(lo) + uniform() * (std::log(hi) - std::log(lo)));
    }

    Bytes log_uniform_bytes(Bytes lo, Bytes hi) {
        return static_cast<Bytes>(std::llround(log_uniform(static_cast<double>(lo), static_cast<double>(hi))));
    }

private:
    std::mt19937_64 eng_;
};

void check_range(double lo, double hi, const char* what) {
    if (!(lo > 0.0) || !(hi >= lo)) throw Error(std::string("bad ") + what + " range");
}

}  // namespace

CompGraph gen_synthetic(const SyntheticSpec& spec, std::uint64_t seed) {
    if (spec.depth < 1 || spec.width < 1) throw Error("depth and width must be at least 1");
    if (spec.num_devices < 1) throw Error("num_devices must be at least 1");
    if (spec.density < 0.0 || spec.density > 1.0) throw Error("density must lie in [0,1]");
    if (spec.skip_window < 0) throw Error("skip_window must be non-negative");
    if (spec.filler_types.empty()) throw Error("filler_types must not be empty");
    for (const auto& p : spec.patterns)
        if (p.empty()) throw Error("empty pattern");
    check_range(spec.time_min_s, spec.time_max_s, "time");
    check_range(static_cast<double>(spec.mem_min), static_cast<double>(spec.mem_max), "mem");
    check_range(static_cast<double>(spec.payload_min), static_cast<double>(spec.payload_max), "payload");

    Rng rng(seed);
    const auto W = static_cast<std::size_t>(spec.width);
    std::vector<OpNode> nodes;
    std::vector<FlowEdge> edges;
    std::vector<std::vector<NodeId>> layers;

    // Per column: the pattern being emitted and the next position in it.
    std::vector<const std::vector<std::string>*> running(W, nullptr);
    std::vector<std::size_t> pos(W, 0);

    NodeId next_id = 1;
    for (int l = 0; l < spec.depth; ++l) {
        std::vector<NodeId> layer;
        for (std::size_t w = 0; w < W; ++w) {
            OpNode n;
            n.id = next_id++;
            if (!running[w] && !spec.patterns.empty() && rng.chance(spec.density)) {
                running[w] = &spec.patterns[rng.below(spec.patterns.size())];
                pos[w] = 0;
            }
            if (running[w]) {
                n.op_type = (*running[w])[pos[w]++];
                if (pos[w] == running[w]->size()) running[w] = nullptr;
            } else {
                n.op_type = spec.filler_types[rng.below(spec.filler_types.size())];
            }
            n.mem_bytes = rng.log_uniform_bytes(spec.mem_min, spec.mem_max);
            for (DeviceId k = 1; k <= spec.num_devices; ++k)
                n.compute_time[k] = rng.log_uniform(spec.time_min_s, spec.time_max_s);
            n.members = {n.id};
            if (l > 0) {
                const auto& prev = layers.back();
                const NodeId parent = prev[w < prev.size() ? w : rng.below(prev.size())];
                edges.push_back({parent, n.id, rng.log_uniform_bytes(spec.payload_min, spec.payload_max)});
                const auto window = std::min<std::size_t>(layers.size(), static_cast<std::size_t>(spec.skip_window));
                for (auto l = layers.size() - window; l < layers.size(); ++l)
                    for (auto src : layers[l])
                        if (src != parent && rng.chance(spec.skip_prob))
                            edges.push_back({src, n.id, rng.log_uniform_bytes(spec.payload_min, spec.payload_max)});
            }
            layer.push_back(n.id);
            nodes.push_back(std::move(n));
        }
        layers.push_back(std::move(layer));
    }
    return CompGraph(std::move(nodes), std::move(edges));
}

Cluster gen_cluster(const ClusterSpec& spec, std::uint64_t seed) {
    if (spec.num_devices < 1) throw Error("num_devices must be at least 1");
    check_range(static_cast<double>(spec.mem_min), static_cast<double>(spec.mem_max), "mem");
    check_range(spec.bw_min_Bps, spec.bw_max_Bps, "bandwidth");
    Rng rng(seed);
    std::vector<Device> devices;
    for (DeviceId k = 1; k <= spec.num_devices; ++k)
        devices.push_back({k, rng.log_uniform_bytes(spec.mem_min, spec.mem_max)});
    std::vector<Link> links;
    std::vector<std::vector<bool>> linked(spec.num_devices + 1, std::vector<bool>(spec.num_devices + 1, false));
    auto add = [&](DeviceId a, DeviceId b) {
        linked[a][b] = linked[b][a] = true;
        const double bw = rng.log_uniform(spec.bw_min_Bps, spec.bw_max_Bps);
        links.push_back({a, b, bw});
    };
    for (DeviceId k = 2; k <= spec.num_devices; ++k) add(static_cast<DeviceId>(1 + rng.below(k - 1)), k);
    for (DeviceId a = 1; a <= spec.num_devices; ++a)
        for (DeviceId b = a + 1; b <= spec.num_devices; ++b)
            if (!linked[a][b] && rng.chance(spec.link_prob)) add(a, b);
    return Cluster(std::move(devices), std::move(links));
}

}  // namespace hetplace
