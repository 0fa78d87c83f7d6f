#pragma once

// Greedy one-pass placement heuristics used as comparison points for the
// exact solver. Simplified stand-ins, not faithful reimplementations of any
// published method.

#include <string_view>

#include "hetplace/solver.hpp"

namespace hetplace {

enum class BaselineKind {
    EarliestFinish,  // "ETF-like"
    EarliestStart,   // "SCT-like"
};

std::string_view to_string(BaselineKind k);

/// Visits ops in topological order and puts each on the memory-feasible
/// device where it would finish (or start) earliest given the ops placed so
/// far, ties to the lower device id. The final schedule comes from
/// schedule_for_assignment. Throws Infeasible when an op fits nowhere.
Solution greedy_place(const Instance& inst, BaselineKind kind);

}  // namespace hetplace
