#pragma once

// Discrete-event replay of a placement and a constraint checker for
// arbitrary schedules. Kept independent of the solver's scheduler so the two
// can cross-check each other.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hetplace/graph.hpp"
#include "hetplace/profiles.hpp"
#include "hetplace/schedule.hpp"

namespace hetplace {

enum class EventKind { OpStart, OpEnd, FlowStart, FlowEnd };

std::string_view to_string(EventKind k);

struct Event {
    Seconds time_s = 0.0;
    EventKind kind = EventKind::OpStart;
    NodeId node = 0;
    std::optional<DeviceId> device;
    std::optional<Channel> channel;

    friend bool operator==(const Event&, const Event&) = default;
};

struct SimResult {
    Seconds makespan_s = 0.0;
    std::vector<Event> trace;  // ordered by (time, kind, node)
    Schedule schedule;
};

// Throws MemoryExceeded when the placement overfills a device.
SimResult simulate(const CompGraph& g, const Cluster& c, const EffectiveMesh& mesh, const Placement& placement);

enum class ViolationKind {
    DeviceOverlap,
    SourceChannelOverlap,
    DestChannelOverlap,
    PrecedenceBreak,
    MemoryOver,
    DurationMismatch,
};

std::string_view to_string(ViolationKind k);

struct Violation {
    ViolationKind kind;
    std::string details;
};

/// Every constraint family the schedule breaks; empty when feasible.
/// Intervals touching at an endpoint do not overlap.
std::vector<Violation> check_feasibility(const Schedule& s, const CompGraph& g, const Cluster& c,
                                         const EffectiveMesh& mesh);

}  // namespace hetplace
