#pragma once

// Exact placement search: branch-and-bound over operator-to-device
// assignments, each leaf timed by an event-driven list scheduler.

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "hetplace/schedule.hpp"

namespace hetplace {

struct SolveBudget {
    std::optional<double> time_limit_s;
    double gap = 0.0;  // relative, in [0,1)
    std::optional<std::uint64_t> node_limit;
};

enum class SolveStatus { Optimal, Feasible, Infeasible, Budget };

std::string_view to_string(SolveStatus s);

struct SolveStats {
    std::uint64_t nodes = 0;
    std::uint64_t leaves = 0;
    std::uint64_t pruned = 0;
};

struct Solution {
    Placement placement;
    Schedule schedule;
    Seconds objective_s = std::numeric_limits<Seconds>::infinity();
    SolveStatus status = SolveStatus::Infeasible;
    double gap = 0.0;
    SolveStats stats;
};

/// Event-driven list scheduling for a fixed assignment (device index per op
/// index). At each event time: finish every task ending now, then start
/// ready tasks in priority order (longest remaining path first, then lower
/// node id) whose resources are free, repeating while zero-length tasks
/// start. Operators hold their device; a split flow holds its source
/// device's outbound slot and its destination device's inbound slot; a
/// co-located flow takes no time and no resource. Throws MemoryExceeded.
Schedule schedule_for_assignment(const Instance& inst, std::span<const std::size_t> assignment);
Schedule schedule_for_assignment(const Instance& inst, const Placement& placement);

/// Same scheduler restricted to the ops with active[i] set (and flows whose
/// endpoints are both active). Memory is not checked.
Schedule schedule_partial(const Instance& inst, std::span<const std::size_t> assignment,
                          const std::vector<bool>& active);

/// Moves every task to the earliest time allowed by its predecessors and by
/// the previous task on each resource it holds, keeping resource orders.
Schedule left_shift(const Instance& inst, const Schedule& s);

/// Lower bound on the makespan of any completion of a partial assignment
/// (nullopt entries are unassigned). Infinity when some unassigned op fits
/// on no device.
Seconds partial_lower_bound(const Instance& inst, std::span<const std::optional<std::size_t>> assignment);

Solution solve_exact(const Instance& inst, const SolveBudget& budget = {});

// Enumerates every assignment; throws TooLarge beyond 2^24 of them.
Solution brute_force(const Instance& inst);

inline constexpr double kBruteForceLimit = 16777216.0;  // 2^24

}  // namespace hetplace
