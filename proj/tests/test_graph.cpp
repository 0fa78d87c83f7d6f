#include <doctest.h>

#include <algorithm>
#include <queue>
#include <set>

#include "hetplace/errors.hpp"
#include "hetplace/graph.hpp"
#include "support.hpp"

using namespace hetplace;
using support::chain;
using support::op_uniform;

namespace {

// Diamond 1->{2,3}->4.
CompGraph diamond() {
    return CompGraph({op_uniform(1, "a", 1), op_uniform(2, "b", 1), op_uniform(3, "c", 1), op_uniform(4, "d", 1)},
                     {{1, 2, 10}, {1, 3, 20}, {2, 4, 30}, {3, 4, 40}});
}

std::set<NodeId> bfs(const CompGraph& g, NodeId from) {
    std::set<NodeId> seen;
    std::queue<NodeId> q;
    q.push(from);
    while (!q.empty()) {
        auto u = q.front();
        q.pop();
        for (const auto& e : g.edges())
            if (e.src == u && seen.insert(e.dst).second) q.push(e.dst);
    }
    return seen;
}

}  // namespace

TEST_CASE("validate_dag") {
    CHECK_NOTHROW(validate_dag(chain({"a", "b", "c"})));
    CHECK_NOTHROW(validate_dag(diamond()));

    const CompGraph two_cycle({op_uniform(1, "a", 1), op_uniform(2, "b", 1)}, {{1, 2, 0}, {2, 1, 0}});
    try {
        validate_dag(two_cycle);
        FAIL("expected CycleError");
    } catch (const CycleError& e) {
        auto cyc = e.cycle();
        std::ranges::sort(cyc);
        CHECK(cyc == std::vector<NodeId>{1, 2});
    }

    CHECK_THROWS_AS(CompGraph({op_uniform(1, "a", 1)}, {{1, 7, 0}}), DanglingEdgeError);
    CHECK_THROWS_AS(CompGraph({op_uniform(1, "a", 1), op_uniform(2, "b", 1)}, {{1, 2, 0}, {1, 2, 5}}), Error);
    CHECK_THROWS_AS(CompGraph({op_uniform(1, "a", 1)}, {{1, 1, 0}}), Error);
}

TEST_CASE("find_cycle witness is a real cycle") {
    const CompGraph g({op_uniform(1, "a", 1), op_uniform(2, "b", 1), op_uniform(3, "c", 1), op_uniform(4, "d", 1)},
                      {{1, 2, 0}, {2, 3, 0}, {3, 4, 0}, {4, 2, 0}});
    auto cyc = find_cycle(g);
    REQUIRE(cyc);
    REQUIRE(cyc->size() == 3);
    for (std::size_t i = 0; i < cyc->size(); ++i)
        CHECK(g.find_edge((*cyc)[i], (*cyc)[(i + 1) % cyc->size()]) != nullptr);
}

TEST_CASE("topo_order") {
    CHECK(topo_order(chain({"a", "b", "c"})) == std::vector<NodeId>{1, 2, 3});
    CHECK(topo_order(diamond()) == std::vector<NodeId>{1, 2, 3, 4});

    // Ties go to the smaller id even when it sits later in the edge list.
    const CompGraph g({op_uniform(5, "a", 1), op_uniform(2, "b", 1), op_uniform(9, "c", 1)}, {{9, 2, 0}});
    CHECK(topo_order(g) == std::vector<NodeId>{5, 9, 2});

    support::Rand r(11);
    for (int trial = 0; trial < 30; ++trial) {
        const auto g8 = support::random_dag(r, 8, 1, 0.35);
        const auto order = topo_order(g8);
        std::vector<NodeId> sorted = order;
        std::ranges::sort(sorted);
        CHECK(sorted == std::vector<NodeId>{1, 2, 3, 4, 5, 6, 7, 8});
        std::map<NodeId, std::size_t> pos;
        for (std::size_t i = 0; i < order.size(); ++i) pos[order[i]] = i;
        for (const auto& e : g8.edges()) CHECK(pos[e.src] < pos[e.dst]);
        CHECK(topo_order(g8) == order);
    }
}

TEST_CASE("succ_closure") {
    const auto c = succ_closure(chain({"a", "b", "c"}));
    CHECK(c.descendants(1) == std::vector<NodeId>{2, 3});
    CHECK(c.descendants(3).empty());

    const CompGraph iso({op_uniform(1, "x", 1)}, {});
    CHECK(succ_closure(iso).descendants(1).empty());

    support::Rand r(5);
    for (int trial = 0; trial < 30; ++trial) {
        const auto g = support::random_dag(r, 10, 1, 0.25);
        const auto cl = succ_closure(g);
        for (const auto& n : g.nodes()) {
            const auto want = bfs(g, n.id);
            const auto got = cl.descendants(n.id);
            CHECK(std::set<NodeId>(got.begin(), got.end()) == want);
            CHECK_FALSE(cl.reaches(n.id, n.id));
        }
    }
}

TEST_CASE("closure is monotone under edge addition") {
    support::Rand r(8);
    for (int trial = 0; trial < 20; ++trial) {
        const auto g = support::random_dag(r, 9, 1, 0.2);
        std::vector<FlowEdge> edges(g.edges().begin(), g.edges().end());
        const NodeId a = r.integer(1, 8);
        const NodeId b = r.integer(a + 1, 9);
        if (g.find_edge(a, b)) continue;
        edges.push_back({a, b, 0});
        const CompGraph bigger({g.nodes().begin(), g.nodes().end()}, edges);
        const auto c0 = succ_closure(g);
        const auto c1 = succ_closure(bigger);
        for (const auto& x : g.nodes())
            for (const auto& y : g.nodes())
                if (c0.reaches(x.id, y.id)) CHECK(c1.reaches(x.id, y.id));
    }
}

TEST_CASE("augment") {
    const auto aug = augment(diamond());
    CHECK(aug.num_nodes() == 8);
    CHECK(aug.links.size() == 8);
    REQUIRE(aug.flow_nodes.size() == 4);
    CHECK(aug.flow_nodes[0] == FlowNode{5, 1, 2, 10});
    CHECK(aug.flow_nodes[3] == FlowNode{8, 3, 4, 40});
    CHECK(aug.is_flow(6));
    CHECK_FALSE(aug.is_flow(4));

    const CompGraph nodes_only({op_uniform(1, "a", 1), op_uniform(2, "b", 1)}, {});
    const auto a2 = augment(nodes_only);
    CHECK(a2.flow_nodes.empty());
    CHECK(a2.links.empty());
    CHECK(a2.op_nodes.size() == 2);

    for (int n = 2; n <= 6; ++n) {
        const auto a = augment(chain(std::vector<std::string>(static_cast<std::size_t>(n), "x")));
        CHECK(a.num_nodes() == static_cast<std::size_t>(2 * n - 1));
        CHECK(a.links.size() == static_cast<std::size_t>(2 * (n - 1)));
    }
}

TEST_CASE("augment properties on random graphs") {
    support::Rand r(21);
    for (int trial = 0; trial < 40; ++trial) {
        const auto g = support::random_dag(r, r.integer(1, 10), 2, 0.3);
        const auto aug = augment(g);
        CHECK(aug.links.size() == 2 * g.num_edges());
        CHECK(contract(aug) == g);

        std::map<NodeId, int> indeg;
        std::map<NodeId, int> outdeg;
        for (const auto& [a, b] : aug.links) {
            ++outdeg[a];
            ++indeg[b];
            CHECK(aug.is_flow(a) != aug.is_flow(b));
        }
        for (const auto& f : aug.flow_nodes) {
            CHECK(indeg[f.id] == 1);
            CHECK(outdeg[f.id] == 1);
        }

        const auto cg = succ_closure(g);
        const auto ca = succ_closure(aug);
        for (const auto& x : g.nodes())
            for (const auto& y : g.nodes()) CHECK(cg.reaches(x.id, y.id) == ca.reaches(x.id, y.id));
    }
}

TEST_CASE("node type sequences") {
    OpNode n = op_uniform(1, "conv", 1);
    CHECK(n.type_sequence() == std::vector<std::string>{"conv"});
    const std::vector<std::string> parts{"conv", "bn", "relu"};
    n.op_type = join_types(parts);
    CHECK(n.type_sequence() == parts);
    CHECK(node_tag_from_string(to_string(NodeTag::Fused)) == NodeTag::Fused);
    CHECK_THROWS_AS(node_tag_from_string("weird"), ParseError);
}

TEST_CASE("weak connectivity is reported, not enforced") {
    const CompGraph g({op_uniform(1, "a", 1), op_uniform(2, "b", 1), op_uniform(3, "c", 1)}, {{1, 2, 0}});
    CHECK_FALSE(g.is_weakly_connected());
    CHECK_NOTHROW(validate_dag(g));
    CHECK(diamond().is_weakly_connected());
}
