#pragma once

// Operator-fusion rules and graph coarsening.

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hetplace/graph.hpp"
#include "hetplace/profiles.hpp"

namespace hetplace {

struct FusionRule {
    int id = 0;
    std::vector<std::string> pattern;

    friend bool operator==(const FusionRule&, const FusionRule&) = default;
};

class FusionRuleSet {
public:
    FusionRuleSet() = default;
    explicit FusionRuleSet(std::vector<FusionRule> rules);

    std::span<const FusionRule> rules() const noexcept { return rules_; }
    std::size_t longest_pattern() const noexcept { return longest_; }
    bool empty() const noexcept { return rules_.empty(); }

    // conv∘bn, conv∘bn∘relu, conv∘bn∘add∘relu with ids 1..3.
    static FusionRuleSet eigen_gpu_defaults();

private:
    std::vector<FusionRule> rules_;
    std::size_t longest_ = 0;
};

enum class ConnKind { Direct, MultiOutputs, MultiInputs };

std::string_view to_string(ConnKind kind);

ConnKind classify_connection(const CompGraph& g, NodeId src, NodeId dst);

// Only direct and multi-input connections are fusable.
bool is_valid_conn(const CompGraph& g, NodeId src, NodeId dst);

enum class MatchKind { None, Full, Partial };

/// Outcome of matching the concatenated type sequence of two nodes.
/// `Partial` means the sequence is a strict contiguous run inside some
/// longer pattern, so the pair may still grow; when the same sequence is
/// also a complete pattern, `full_rule` names it. `rule` is the lowest id
/// among the rules the sequence extends toward (Partial), or the matched
/// rule (Full).
struct RuleMatch {
    MatchKind kind = MatchKind::None;
    int rule = 0;
    std::optional<int> full_rule;

    friend bool operator==(const RuleMatch&, const RuleMatch&) = default;
};

RuleMatch match_types(std::span<const std::string> types, const FusionRuleSet& rules);
RuleMatch match_rule(const OpNode& pred, const OpNode& succ, const FusionRuleSet& rules);

struct FuseResult {
    CompGraph graph;
    OpNode node;
};

// Merges pred and succ along edge (pred,succ) into a fresh node (id = max+1).
// Throws UnknownEdge or CycleCreation.
FuseResult fuse(const CompGraph& g, NodeId pred, NodeId succ, const CostOverrides& overrides = {});

enum class CoarsenAction { Fuse, Bind, RejectConnection, RejectCycle, Finalize, Release };

std::string_view to_string(CoarsenAction action);

struct CoarsenEvent {
    CoarsenAction action;
    // Input-node ids involved, in member order.
    std::vector<NodeId> parts;
    std::vector<std::string> types;
    int rule = 0;
    int pass = 1;
};

struct CoarsenResult {
    CompGraph graph;
    std::vector<CoarsenEvent> trace;
    int passes = 0;
};

/// Graph coarsening with operator fusion. Output node ids are 1..n ordered by
/// the smallest input id in each group; fused nodes carry the concatenated
/// members of their parts.
CoarsenResult coarsen(const CompGraph& g, const FusionRuleSet& rules, const CostOverrides& overrides = {});

inline CompGraph gcof(const CompGraph& g, const FusionRuleSet& rules, const CostOverrides& overrides = {}) {
    return coarsen(g, rules, overrides).graph;
}

}  // namespace hetplace
