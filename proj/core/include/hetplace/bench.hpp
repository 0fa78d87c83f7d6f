#pragma once

// Benchmark harness: runs every (graph, variant, method) cell, measures
// placement generation time and simulated makespan, and writes reports.

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "hetplace/fusion.hpp"
#include "hetplace/graph.hpp"
#include "hetplace/profiles.hpp"
#include "hetplace/solver.hpp"

namespace hetplace {

struct BenchGraph {
    std::string name;
    CompGraph graph;
};

struct BenchConfig {
    std::vector<BenchGraph> graphs;
    Cluster cluster;
    std::vector<std::string> methods = {"exact", "etf", "sct"};
    std::string baseline = "etf";
    SolveBudget budget;
    FusionRuleSet rules = FusionRuleSet::eigen_gpu_defaults();
    CostOverrides overrides;
    bool raw = true;
    bool coarsened = true;
    int repeats = 3;
};

struct BenchCell {
    std::string graph;
    std::string variant;  // "raw" | "coarsened"
    std::string method;
    std::size_t ops = 0;
    std::size_t edges = 0;
    std::size_t binaries = 0;
    double gen_time_s = 0.0;  // median over repeats
    std::optional<Seconds> makespan_s;
    std::optional<double> speedup;
    std::string status;
    std::size_t violations = 0;
    std::string error;
};

struct BenchReport {
    std::vector<BenchCell> cells;

    bool all_ok() const;
};

// Known methods: "exact", "etf", "sct".
Solution run_method(const std::string& method, const Instance& inst, const SolveBudget& budget);

// Per-cell failures are recorded in the cell's error field.
BenchReport run_bench(const BenchConfig& cfg);

// Column order: graph,variant,method,ops,edges,binaries,gen_time_s,makespan_s,speedup,status,violations,error
void write_csv(const BenchReport& r, std::ostream& os);
std::string to_json(const BenchReport& r);

// bench.csv, bench.json, speedup.dat and gentime.dat under dir.
void write_report(const BenchReport& r, const std::filesystem::path& dir);

}  // namespace hetplace
