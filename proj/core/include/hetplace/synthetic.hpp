#pragma once

// Seeded generators for layered operator DAGs and device clusters.

#include <cstdint>
#include <string>
#include <vector>

#include "hetplace/graph.hpp"
#include "hetplace/profiles.hpp"

namespace hetplace {

struct SyntheticSpec {
    int depth = 4;
    int width = 2;
    // Chance that a column starts a fusible pattern at a given layer.
    double density = 0.5;
    // Chance of each extra edge from an earlier layer.
    double skip_prob = 0.15;
    // How many layers back extra edges may reach.
    int skip_window = 3;
    int num_devices = 2;
    std::vector<std::vector<std::string>> patterns = {{"conv", "bn", "relu"}};
    std::vector<std::string> filler_types = {"matmul", "pool", "softmax", "add", "relu", "concat"};
    double time_min_s = 1e-3;
    double time_max_s = 1e-1;
    Bytes mem_min = 1u << 20;
    Bytes mem_max = 64u << 20;
    Bytes payload_min = 1u << 16;
    Bytes payload_max = 16u << 20;
};

// Throws Error on a malformed spec (depth or width below 1, bad ranges).
CompGraph gen_synthetic(const SyntheticSpec& spec, std::uint64_t seed);

struct ClusterSpec {
    int num_devices = 2;
    Bytes mem_min = 1ull << 30;
    Bytes mem_max = 1ull << 30;
    double bw_min_Bps = 1e8;
    double bw_max_Bps = 1e9;
    // Chance of each extra link beyond a random spanning tree; 1 gives a full mesh.
    double link_prob = 1.0;
};

// Device ids 1..num_devices; always connected.
Cluster gen_cluster(const ClusterSpec& spec, std::uint64_t seed);

}  // namespace hetplace
