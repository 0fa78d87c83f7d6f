#include "hetplace/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <queue>
#include <set>
#include <tuple>
#include <unordered_map>

#include "hetplace/errors.hpp"

namespace hetplace {

std::string_view to_string(EventKind k) {
    switch (k) {
        case EventKind::OpStart: return "op_start";
        case EventKind::OpEnd: return "op_end";
        case EventKind::FlowStart: return "flow_start";
        case EventKind::FlowEnd: return "flow_end";
    }
    return "op_start";
}

std::string_view to_string(ViolationKind k) {
    switch (k) {
        case ViolationKind::DeviceOverlap: return "device_overlap";
        case ViolationKind::SourceChannelOverlap: return "source_channel_overlap";
        case ViolationKind::DestChannelOverlap: return "dest_channel_overlap";
        case ViolationKind::PrecedenceBreak: return "precedence_break";
        case ViolationKind::MemoryOver: return "memory_over";
        case ViolationKind::DurationMismatch: return "duration_mismatch";
    }
    return "device_overlap";
}

namespace {

enum class Slot { Exec, Out, In };

struct SimTask {
    NodeId id = 0;
    bool is_flow = false;
    Seconds dur = 0.0;
    double rank = 0.0;
    std::vector<std::pair<Slot, DeviceId>> holds;
    std::vector<NodeId> succ;
    int waiting_on = 0;
    std::optional<DeviceId> device;
    std::optional<Channel> channel;
    Seconds start = 0.0;
    Seconds end = 0.0;
};

}  // namespace

SimResult simulate(const CompGraph& g, const Cluster& c, const EffectiveMesh& mesh, const Placement& placement) {
    const AugGraph aug = augment(g);

    std::map<DeviceId, Bytes> used;
    for (const auto& n : g.nodes()) {
        auto it = placement.device_of.find(n.id);
        if (it == placement.device_of.end()) throw Error("placement does not cover op " + std::to_string(n.id));
        used[it->second] += n.mem_bytes;
    }
    for (const auto& [dev, bytes] : used) {
        const auto cap = c.device(dev).mem_bytes;
        if (bytes > cap) throw MemoryExceeded(dev, bytes - cap);
    }

    std::map<NodeId, SimTask> tasks;
    for (const auto& n : aug.op_nodes) {
        SimTask t;
        t.id = n.id;
        t.device = placement.device_of.at(n.id);
        auto ct = n.compute_time.find(*t.device);
        if (ct == n.compute_time.end()) throw MissingCost(n.id, *t.device);
        t.dur = ct->second;
        t.holds = {{Slot::Exec, *t.device}};
        tasks.emplace(n.id, std::move(t));
    }
    for (const auto& f : aug.flow_nodes) {
        SimTask t;
        t.id = f.id;
        t.is_flow = true;
        const auto from = placement.device_of.at(f.src);
        const auto to = placement.device_of.at(f.dst);
        if (from != to) {
            t.channel = Channel{from, to};
            t.dur = comm_time(f.payload_bytes, from, to, mesh);
            t.holds = {{Slot::Out, from}, {Slot::In, to}};
        }
        tasks.emplace(f.id, std::move(t));
    }
    for (const auto& [a, b] : aug.links) {
        tasks.at(a).succ.push_back(b);
        ++tasks.at(b).waiting_on;
    }

    // Longest path from each task's start to a sink, memoised.
    std::unordered_map<NodeId, bool> ranked;
    std::function<double(NodeId)> rank_of = [&](NodeId id) -> double {
        auto& t = tasks.at(id);
        if (ranked[id]) return t.rank;
        double tail = 0.0;
        for (auto s : t.succ) tail = std::max(tail, rank_of(s));
        t.rank = t.dur + tail;
        ranked[id] = true;
        return t.rank;
    };
    for (auto& [id, t] : tasks) rank_of(id);

    using ReadyKey = std::tuple<double, NodeId>;  // (-rank, id)
    std::set<ReadyKey> ready;
    for (auto& [id, t] : tasks)
        if (t.waiting_on == 0) ready.emplace(-t.rank, id);

    using Done = std::pair<Seconds, NodeId>;
    std::priority_queue<Done, std::vector<Done>, std::greater<>> pending;
    std::set<std::pair<Slot, DeviceId>> held;

    SimResult out;
    Seconds now = 0.0;
    auto emit = [&](const SimTask& t, bool is_start) {
        Event e;
        e.time_s = is_start ? t.start : t.end;
        e.kind = t.is_flow ? (is_start ? EventKind::FlowStart : EventKind::FlowEnd)
                           : (is_start ? EventKind::OpStart : EventKind::OpEnd);
        e.node = t.id;
        e.device = t.device;
        e.channel = t.channel;
        out.trace.push_back(e);
    };

    for (;;) {
        bool again = true;
        while (again) {
            again = false;
            while (!pending.empty() && pending.top().first <= now) {
                auto& t = tasks.at(pending.top().second);
                pending.pop();
                for (const auto& h : t.holds) held.erase(h);
                emit(t, false);
                for (auto s : t.succ) {
                    auto& st = tasks.at(s);
                    if (--st.waiting_on == 0) ready.emplace(-st.rank, s);
                }
            }
            for (auto it = ready.begin(); it != ready.end();) {
                auto& t = tasks.at(std::get<1>(*it));
                const bool blocked = std::ranges::any_of(t.holds, [&](const auto& h) { return held.contains(h); });
                if (blocked) {
                    ++it;
                    continue;
                }
                for (const auto& h : t.holds) held.insert(h);
                t.start = now;
                t.end = now + t.dur;
                emit(t, true);
                pending.emplace(t.end, t.id);
                if (t.dur == 0.0) again = true;
                it = ready.erase(it);
            }
        }
        if (pending.empty()) break;
        now = pending.top().first;
    }
    if (!ready.empty()) throw Error("simulation stalled with unfinished tasks");

    std::ranges::sort(out.trace, [](const Event& a, const Event& b) {
        return std::tie(a.time_s, a.kind, a.node) < std::tie(b.time_s, b.kind, b.node);
    });
    for (const auto& [id, t] : tasks) {
        out.schedule.tasks.push_back({id, t.is_flow, t.start, t.end, t.device, t.channel});
        if (!t.is_flow) out.makespan_s = std::max(out.makespan_s, t.end);
    }
    return out;
}

std::vector<Violation> check_feasibility(const Schedule& s, const CompGraph& g, const Cluster& c,
                                         const EffectiveMesh& mesh) {
    const AugGraph aug = augment(g);
    std::vector<Violation> out;
    auto add = [&](ViolationKind k, std::string d) { out.push_back({k, std::move(d)}); };
    auto overlaps = [](const TaskTiming& a, const TaskTiming& b) {
        return a.start < b.end - kTolerance && b.start < a.end - kTolerance;
    };
    auto name = [](NodeId id) { return std::to_string(id); };

    std::map<NodeId, DeviceId> dev;
    for (const auto& n : aug.op_nodes) {
        const auto& t = s.at(n.id);
        if (!t.device) throw Error("schedule entry for op " + name(n.id) + " has no device");
        dev[n.id] = *t.device;
    }

    std::map<DeviceId, Bytes> used;
    for (const auto& n : aug.op_nodes) used[dev[n.id]] += n.mem_bytes;
    for (const auto& [k, bytes] : used)
        if (bytes > c.device(k).mem_bytes)
            add(ViolationKind::MemoryOver, "device " + std::to_string(k) + " holds " + std::to_string(bytes) + " bytes");

    for (const auto& n : aug.op_nodes) {
        const auto& t = s.at(n.id);
        auto ct = n.compute_time.find(dev[n.id]);
        const Seconds want = ct == n.compute_time.end() ? NAN : ct->second;
        if (!(std::abs((t.end - t.start) - want) <= kTolerance))
            add(ViolationKind::DurationMismatch, "op " + name(n.id));
    }
    for (const auto& f : aug.flow_nodes) {
        const auto& t = s.at(f.id);
        const Seconds want = comm_time(f.payload_bytes, dev[f.src], dev[f.dst], mesh);
        if (!(std::abs((t.end - t.start) - want) <= kTolerance))
            add(ViolationKind::DurationMismatch, "flow " + name(f.id));
    }

    for (const auto& [a, b] : aug.links) {
        if (s.at(a).end > s.at(b).start + kTolerance)
            add(ViolationKind::PrecedenceBreak, name(a) + " -> " + name(b));
    }
    for (const auto& t : s.tasks)
        if (t.start < -kTolerance) add(ViolationKind::PrecedenceBreak, "node " + name(t.node) + " starts before 0");

    const auto& ops = aug.op_nodes;
    for (std::size_t i = 0; i < ops.size(); ++i)
        for (std::size_t j = i + 1; j < ops.size(); ++j)
            if (dev[ops[i].id] == dev[ops[j].id] && overlaps(s.at(ops[i].id), s.at(ops[j].id)))
                add(ViolationKind::DeviceOverlap, "ops " + name(ops[i].id) + " and " + name(ops[j].id));

    const auto& flows = aug.flow_nodes;
    for (std::size_t i = 0; i < flows.size(); ++i) {
        const auto& p = flows[i];
        if (dev[p.src] == dev[p.dst]) continue;
        for (std::size_t j = i + 1; j < flows.size(); ++j) {
            const auto& r = flows[j];
            if (dev[r.src] == dev[r.dst]) continue;
            if (!overlaps(s.at(p.id), s.at(r.id))) continue;
            if (dev[p.src] == dev[r.src])
                add(ViolationKind::SourceChannelOverlap, "flows " + name(p.id) + " and " + name(r.id));
            if (dev[p.dst] == dev[r.dst])
                add(ViolationKind::DestChannelOverlap, "flows " + name(p.id) + " and " + name(r.id));
        }
    }
    return out;
}

}  // namespace hetplace
