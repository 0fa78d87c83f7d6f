#pragma once

// JSON readers and writers for graphs, clusters, fusion rules, cost
// overrides, placements and simulation traces.

#include <filesystem>
#include <string>

#include "hetplace/fusion.hpp"
#include "hetplace/graph.hpp"
#include "hetplace/profiles.hpp"
#include "hetplace/schedule.hpp"
#include "hetplace/simulator.hpp"
#include "hetplace/solver.hpp"

namespace hetplace::io {

inline constexpr int kGraphSchema = 1;

// All parsers throw ParseError on malformed or ill-typed input; graph and
// cluster construction errors propagate unchanged.
CompGraph parse_graph(const std::string& text);
std::string dump_graph(const CompGraph& g);

Cluster parse_cluster(const std::string& text);
std::string dump_cluster(const Cluster& c);

FusionRuleSet parse_rules(const std::string& text);
std::string dump_rules(const FusionRuleSet& rules);

CostOverrides parse_overrides(const std::string& text);
std::string dump_overrides(const CostOverrides& o);

struct PlacementFile {
    Placement placement;
    Schedule schedule;
    Seconds makespan_s = 0.0;
    std::string method;
    std::string status;
};

PlacementFile parse_placement(const std::string& text);
std::string dump_placement(const PlacementFile& p);
PlacementFile to_placement_file(const Solution& s, std::string method);

std::string dump_trace(const SimResult& r, const std::vector<Violation>& violations = {});

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& text);

}  // namespace hetplace::io
