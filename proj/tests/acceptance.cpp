// Acceptance checks; prints one PASS/FAIL line per criterion and exits
// nonzero if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "hetplace/baselines.hpp"
#include "hetplace/bench.hpp"
#include "hetplace/errors.hpp"
#include "hetplace/fusion.hpp"
#include "hetplace/io.hpp"
#include "hetplace/milp.hpp"
#include "hetplace/simulator.hpp"
#include "hetplace/solver.hpp"
#include "hetplace/synthetic.hpp"
#include "support.hpp"

using namespace hetplace;
using Clock = std::chrono::steady_clock;

namespace {

constexpr double kLpTolerance = 1e-6;
constexpr double kOracleBudgetS = 60.0;
constexpr double kGenTimeRatio = 0.8;
constexpr double kMinHeuristicGap = 1.3;

const FusionRuleSet kRules = FusionRuleSet::eigen_gpu_defaults();

class Tally {
public:
    void expect(bool ok, const std::string& what) {
        if (!ok && first_.empty()) first_ = what;
        ok_ = ok_ && ok;
    }
    bool ok() const { return ok_; }
    const std::string& first_failure() const { return first_; }

private:
    bool ok_ = true;
    std::string first_;
};

int failures = 0;

void report(int n, const Tally& t, const std::string& detail) {
    std::cout << "criterion " << n << ": " << (t.ok() ? "PASS" : "FAIL") << "  " << detail;
    if (!t.ok()) std::cout << "  [first failure: " << t.first_failure() << "]";
    std::cout << std::endl;
    if (!t.ok()) ++failures;
}

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

Instance make(const CompGraph& g, const Cluster& c) { return Instance(g, c, effective_bandwidth(c)); }

double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const auto n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string fmt(double x) {
    std::ostringstream os;
    os << x;
    return os.str();
}

struct OracleCase {
    CompGraph g;
    Cluster c;
    Solution sol;
};

std::vector<OracleCase> criterion1() {
    Tally t;
    std::vector<OracleCase> solved;
    int infeasible = 0;
    const double tightness[] = {0.35, 0.6, 1.0};
    const auto t0 = Clock::now();
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        support::Rand r(seed * 7919);
        const int n = r.integer(3, 8);
        const int K = r.integer(2, 3);
        const auto g = support::random_dag(r, n, K, r.real(0.15, 0.6));
        const auto c = support::random_cluster(r, K, support::total_mem(g), tightness[seed % 3]);
        const auto inst = make(g, c);
        std::optional<Solution> ex, bf;
        try {
            ex = solve_exact(inst);
        } catch (const Infeasible&) {
        }
        try {
            bf = brute_force(inst);
        } catch (const Infeasible&) {
        }
        const auto tag = "seed " + std::to_string(seed);
        t.expect(ex.has_value() == bf.has_value(), tag + ": feasibility disagrees");
        if (!ex || !bf) {
            ++infeasible;
            continue;
        }
        t.expect(ex->objective_s == bf->objective_s,
                 tag + ": exact " + fmt(ex->objective_s) + " vs brute " + fmt(bf->objective_s));
        t.expect(ex->status == SolveStatus::Optimal, tag + ": status");
        solved.push_back({g, c, *ex});
    }
    const double elapsed = seconds_since(t0);
    t.expect(elapsed < kOracleBudgetS, "runtime " + fmt(elapsed) + " s");
    t.expect(solved.size() >= 40, "too few feasible instances");
    report(1, t,
           "exact == brute force on 50 DAGs (" + std::to_string(solved.size()) + " feasible, " +
               std::to_string(infeasible) + " infeasible on both), " + fmt(elapsed) + " s < " + fmt(kOracleBudgetS) +
               " s");
    return solved;
}

void criterion2(const std::vector<OracleCase>& cases) {
    Tally t;
    std::size_t checked = 0;
    auto verify = [&](const CompGraph& g, const Cluster& c, const Solution& s, const std::string& tag) {
        const auto mesh = effective_bandwidth(c);
        const auto sim = simulate(g, c, mesh, s.placement);
        t.expect(sim.makespan_s == s.objective_s,
                 tag + ": simulate " + fmt(sim.makespan_s) + " vs objective " + fmt(s.objective_s));
        t.expect(check_feasibility(s.schedule, g, c, mesh).empty(), tag + ": solution schedule violations");
        t.expect(check_feasibility(sim.schedule, g, c, mesh).empty(), tag + ": simulated schedule violations");
        ++checked;
    };
    for (std::size_t i = 0; i < cases.size(); ++i) verify(cases[i].g, cases[i].c, cases[i].sol, "exact " + std::to_string(i));
    int greedy = 0;
    for (std::uint64_t seed = 1; greedy < 50; ++seed) {
        support::Rand r(seed * 104729);
        const int K = r.integer(2, 3);
        const auto g = support::random_dag(r, r.integer(3, 10), K, r.real(0.15, 0.6));
        const auto c = support::random_cluster(r, K, support::total_mem(g), seed % 2 ? 0.6 : 1.0);
        const auto kind = seed % 2 ? BaselineKind::EarliestFinish : BaselineKind::EarliestStart;
        try {
            verify(g, c, greedy_place(make(g, c), kind), std::string(to_string(kind)) + " seed " + std::to_string(seed));
            ++greedy;
        } catch (const Infeasible&) {
        }
    }
    report(2, t, "simulate == objective and no violations on " + std::to_string(checked) + " solutions (" +
                     std::to_string(cases.size()) + " exact + " + std::to_string(greedy) + " greedy)");
}

void criterion3() {
    Tally t;
    const Cluster c({{1, 1}, {2, 1}, {3, 1}}, {{1, 2, 10e6}, {2, 3, 5e6}});
    const auto mesh = effective_bandwidth(c);
    const Seconds got = comm_time(100'000'000, 1, 3, mesh);
    t.expect(got == 20.0, "comm_time = " + fmt(got));
    t.expect(mesh.bandwidth(1, 3) == 5e6, "bandwidth A-D");
    report(3, t, "comm_time(100 MB, A, D) = " + fmt(got) + " s (expected 20 exactly)");
}

CompGraph residual_block() {
    using support::op_uniform;
    return CompGraph(
        {op_uniform(1, "add", 1), op_uniform(2, "relu", 1), op_uniform(3, "add", 1), op_uniform(4, "relu", 1),
         op_uniform(5, "add", 1), op_uniform(6, "relu", 1), op_uniform(7, "conv", 1), op_uniform(8, "bn", 1),
         op_uniform(9, "conv", 1), op_uniform(10, "bn", 1)},
        {{1, 2, 1}, {1, 7, 1}, {2, 3, 1}, {3, 4, 1}, {4, 5, 1}, {5, 6, 1}, {7, 8, 1}, {8, 9, 1}, {9, 10, 1}, {10, 5, 1}});
}

void check_invariants(Tally& t, const CompGraph& in, const CompGraph& out, const std::string& tag) {
    try {
        validate_dag(out);
    } catch (const Error&) {
        t.expect(false, tag + ": cyclic output");
    }
    std::vector<NodeId> all;
    for (const auto& n : out.nodes()) {
        t.expect(n.tag != NodeTag::Bound, tag + ": bound tag left");
        all.insert(all.end(), n.members.begin(), n.members.end());
    }
    std::sort(all.begin(), all.end());
    std::vector<NodeId> want;
    for (const auto& n : in.nodes()) want.push_back(n.id);
    t.expect(all == want, tag + ": members not conserved");
    t.expect(gcof(out, kRules) == out, tag + ": not idempotent");
}

void criterion4() {
    Tally t;
    const auto g = residual_block();
    const auto out = gcof(g, kRules);
    auto find = [&](const std::vector<NodeId>& members) -> const OpNode* {
        for (const auto& n : out.nodes())
            if (n.members == members) return &n;
        return nullptr;
    };
    t.expect(out.num_nodes() == 6, "node count " + std::to_string(out.num_nodes()));
    for (NodeId id : {1, 2, 3, 4}) {
        const auto* n = find({id});
        t.expect(n && n->tag == NodeTag::Plain && n->op_type == g.node(id).op_type,
                 "node " + std::to_string(id) + " should stay unfused");
    }
    const auto* head = find({7, 8});
    t.expect(head && head->tag == NodeTag::Fused &&
                 head->type_sequence() == std::vector<std::string>{"conv", "bn"},
             "conv1+bn not fused");
    const auto* tail = find({9, 10, 5, 6});
    t.expect(tail && tail->tag == NodeTag::Fused &&
                 tail->type_sequence() == std::vector<std::string>{"conv", "bn", "add", "relu"},
             "tail not merged under the 4-op rule");
    const std::set<std::pair<NodeId, NodeId>> edges_want = {{1, 2}, {1, 7}, {2, 3}, {3, 4}, {4, 9}, {7, 9}};
    std::set<std::pair<NodeId, NodeId>> edges_got;
    auto id_of = [&](NodeId member) {
        for (const auto& n : out.nodes())
            if (std::find(n.members.begin(), n.members.end(), member) != n.members.end()) return n.members.front();
        return NodeId{0};
    };
    for (const auto& e : out.edges()) edges_got.insert({out.node(e.src).members.front(), out.node(e.dst).members.front()});
    t.expect(edges_got == edges_want, "coarsened edges");
    t.expect(id_of(5) == 9 && id_of(6) == 9, "add/relu of the tail");
    check_invariants(t, g, out, "residual block");

    int graphs = 0;
    for (std::uint64_t seed = 1; seed <= 100; ++seed) {
        SyntheticSpec spec;
        spec.depth = 2 + static_cast<int>(seed % 9);
        spec.width = 1 + static_cast<int>(seed % 4);
        spec.density = 0.3 + 0.1 * static_cast<double>(seed % 7);
        spec.patterns = {{"conv", "bn", "relu"}, {"conv", "bn"}, {"conv", "bn", "add", "relu"}};
        const auto sg = gen_synthetic(spec, seed);
        check_invariants(t, sg, gcof(sg, kRules), "synthetic seed " + std::to_string(seed));
        ++graphs;
    }
    report(4, t, "residual block matches node by node; invariants hold on " + std::to_string(graphs) +
                     " synthetic graphs");
}

// Chain of conv,bn,relu patterns. Tensors inside a pattern are large enough
// that splitting one across devices never pays, so both graphs share an
// optimum.
CompGraph fusible_chain(std::uint64_t seed, int patterns, int K) {
    support::Rand r(seed);
    std::vector<OpNode> nodes;
    std::vector<FlowEdge> edges;
    const char* types[] = {"conv", "bn", "relu"};
    NodeId id = 0;
    for (int p = 0; p < patterns; ++p)
        for (int i = 0; i < 3; ++i) {
            ++id;
            std::map<DeviceId, Seconds> t;
            for (DeviceId k = 1; k <= K; ++k) t[k] = r.grid_time();
            nodes.push_back(support::op(id, types[i], static_cast<Bytes>(r.integer(1, 10)), t));
            if (id > 1) edges.push_back({id - 1, id, i == 0 ? static_cast<Bytes>(r.integer(1, 8) * 1'000'000) : Bytes{1} << 40});
        }
    return CompGraph(nodes, edges);
}

void criterion5() {
    Tally t;
    constexpr int K = 3;
    constexpr int kRepeats = 5;
    constexpr int kPatterns = 5;
    const auto cluster = support::mesh_cluster(K, 4e6);
    std::vector<double> raw_times, co_times;
    int instances = 0;
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        const auto g = fusible_chain(seed, kPatterns, K);
        const auto tag = "chain " + std::to_string(seed);
        Seconds raw_obj = 0, co_obj = 0;
        std::size_t co_ops = 0;
        for (int rep = 0; rep < kRepeats; ++rep) {
            auto t0 = Clock::now();
            raw_obj = solve_exact(make(g, cluster)).objective_s;
            raw_times.push_back(seconds_since(t0));

            t0 = Clock::now();
            const auto gc = gcof(g, kRules);
            co_obj = solve_exact(make(gc, cluster)).objective_s;
            co_times.push_back(seconds_since(t0));
            co_ops = gc.num_nodes();
        }
        const auto raw_bin = count_binaries(g, K);
        const auto co_bin = count_binaries(gcof(g, kRules), K);
        t.expect(co_ops < g.num_nodes(), tag + ": nothing fused");
        t.expect(co_bin < raw_bin, tag + ": binaries " + std::to_string(co_bin) + " vs " + std::to_string(raw_bin));
        t.expect(co_obj <= raw_obj, tag + ": coarsened makespan " + fmt(co_obj) + " > raw " + fmt(raw_obj));
        ++instances;
    }
    const double raw_med = median(raw_times);
    const double co_med = median(co_times);
    t.expect(co_med <= kGenTimeRatio * raw_med, "median gen time " + fmt(co_med) + " vs raw " + fmt(raw_med));
    const auto g0 = fusible_chain(1, kPatterns, K);
    report(5, t, std::to_string(instances) + " chains of " + std::to_string(3 * kPatterns) + " ops -> " +
                     std::to_string(kPatterns) + "; binaries " +
                     std::to_string(count_binaries(gcof(g0, kRules), K)) + " vs " + std::to_string(count_binaries(g0, K)) +
                     "; median gen time " + fmt(co_med) + " s vs " + fmt(raw_med) + " s (ratio " +
                     fmt(co_med / raw_med) + ", need <= " + fmt(kGenTimeRatio) + ")");
}

void criterion6() {
    Tally t;
    BenchConfig cfg;
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
        SyntheticSpec s;
        s.depth = 3 + static_cast<int>(seed % 2);
        s.width = 2;
        s.density = 0.6;
        s.num_devices = 3;
        cfg.graphs.push_back({"syn" + std::to_string(seed), gen_synthetic(s, seed)});
    }
    ClusterSpec cs;
    cs.num_devices = 3;
    cs.bw_min_Bps = 5e7;
    cs.bw_max_Bps = 5e8;
    cs.link_prob = 0.5;
    cfg.cluster = gen_cluster(cs, 17);
    cfg.repeats = 1;
    const auto rep = run_bench(cfg);
    std::size_t compared = 0;
    for (const auto& cell : rep.cells) {
        t.expect(cell.error.empty() && cell.makespan_s, cell.graph + "/" + cell.variant + "/" + cell.method + ": " + cell.error);
        if (cell.method == "exact" || !cell.makespan_s) continue;
        for (const auto& ex : rep.cells)
            if (ex.method == "exact" && ex.graph == cell.graph && ex.variant == cell.variant && ex.makespan_s) {
                t.expect(*ex.makespan_s <= *cell.makespan_s, cell.graph + "/" + cell.variant + ": exact worse than " + cell.method);
                ++compared;
            }
    }

    // a is cheap on d1, b is cheap on d2, and moving the tensor costs 20 s.
    const auto trap = make(CompGraph({support::op(1, "a", 1, {{1, 1.0}, {2, 2.0}}),
                                      support::op(2, "b", 1, {{1, 10.0}, {2, 1.0}})},
                                     {{1, 2, 20}}),
                           support::mesh_cluster(2, 1.0));
    const double exact = solve_exact(trap).objective_s;
    double worst_ratio = 1e300;
    for (auto kind : {BaselineKind::EarliestFinish, BaselineKind::EarliestStart})
        worst_ratio = std::min(worst_ratio, greedy_place(trap, kind).objective_s / exact);
    t.expect(worst_ratio >= kMinHeuristicGap, "constructed gap " + fmt(worst_ratio));
    report(6, t, "exact <= etf, sct in " + std::to_string(compared) + " bench comparisons; constructed gap " +
                     fmt(worst_ratio) + "x (need >= " + fmt(kMinHeuristicGap) + "x)");
}

enum class LpRun { Ok, Unavailable, Failed };

LpRun solve_lp(const std::string& lp_text, const std::filesystem::path& dir, nlohmann::json& out) {
#if defined(HETPLACE_PYTHON) && defined(HETPLACE_SOLVE_LP)
    const auto lp = dir / "model.lp";
    const auto js = dir / "solution.json";
    io::write_file(lp, lp_text);
    const std::string cmd = std::string("\"") + HETPLACE_PYTHON + "\" \"" + HETPLACE_SOLVE_LP + "\" \"" + lp.string() +
                            "\" --out \"" + js.string() + "\" 2>/dev/null";
    const int rc = std::system(cmd.c_str());
    if (rc != 0) {
        if (WIFEXITED(rc) && WEXITSTATUS(rc) == 2) return LpRun::Unavailable;
        return LpRun::Failed;
    }
    out = nlohmann::json::parse(io::read_file(js));
    return LpRun::Ok;
#else
    (void)lp_text;
    (void)dir;
    (void)out;
    return LpRun::Unavailable;
#endif
}

void criterion7() {
    Tally t;
    const auto dir = std::filesystem::temp_directory_path() / ("hetplace_acceptance_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);

    const auto g = CompGraph({support::op(1, "a", 1, {{1, 2.0}, {2, 1.0}}), support::op(2, "b", 1, {{1, 3.0}, {2, 4.0}})},
                             {{1, 2, 10'000'000}});
    const auto c = support::mesh_cluster(2, 5e6);
    const auto mesh = effective_bandwidth(c);
    const auto text = to_lp_string(build_model(g, c, mesh));
    const auto again = to_lp_string(build_model(io::parse_graph(io::dump_graph(g)), io::parse_cluster(io::dump_cluster(c)),
                                                effective_bandwidth(c)));
    t.expect(text == again, "LP text differs between identical models");

    const double exact = solve_exact(make(g, c)).objective_s;
    nlohmann::json res;
    std::string detail;
    switch (solve_lp(text, dir, res)) {
        case LpRun::Ok: {
            const double obj = res.at("objective").get<double>();
            t.expect(res.at("status") == "Optimal", "external status " + res.at("status").dump());
            t.expect(std::abs(obj - exact) <= kLpTolerance, "external " + fmt(obj) + " vs exact " + fmt(exact));
            detail = "external MILP objective " + fmt(obj) + " vs exact " + fmt(exact) + " (tol " + fmt(kLpTolerance) +
                     "); export byte-identical";
            break;
        }
        case LpRun::Unavailable:
            detail = "export byte-identical; external solver unavailable, objective comparison skipped";
            break;
        case LpRun::Failed:
            t.expect(false, "external solve failed");
            break;
    }
    report(7, t, detail);

    // Informational: the full model also admits schedules the list scheduler
    // never produces, so its optimum may undercut the assignment search.
    if (res.is_null()) {
        std::filesystem::remove_all(dir);
        return;
    }
    int runs = 0, below = 0, above = 0;
    double biggest = 0.0;
    for (std::uint64_t seed = 1; seed <= 12; ++seed) {
        support::Rand r(seed * 31337);
        const auto rg = support::random_dag(r, r.integer(3, 5), 2, 0.5);
        const auto rc = support::random_cluster(r, 2, support::total_mem(rg), 1.0);
        const double bb = solve_exact(make(rg, rc)).objective_s;
        nlohmann::json sol;
        if (solve_lp(to_lp_string(build_model(rg, rc, effective_bandwidth(rc))), dir, sol) != LpRun::Ok) continue;
        const double milp = sol.at("objective").get<double>();
        ++runs;
        if (milp < bb - kLpTolerance) {
            ++below;
            biggest = std::max(biggest, (bb - milp) / bb);
        }
        if (milp > bb + kLpTolerance) ++above;
    }
    std::cout << "info: model optimum vs assignment search on " << runs << " random instances: " << below
              << " strictly lower (max " << fmt(100.0 * biggest) << "%), " << above << " higher" << std::endl;
    std::filesystem::remove_all(dir);
}

void criterion8() {
    Tally t;
    constexpr int K = 4;
    std::optional<CompGraph> gc;
    std::uint64_t seed = 1;
    for (; seed < 500 && !gc; ++seed) {
        SyntheticSpec s;
        s.depth = 12;
        s.width = 3;
        s.density = 0.5;
        s.num_devices = K;
        auto c = gcof(gen_synthetic(s, seed), kRules);
        if (c.num_nodes() == 30) gc = std::move(c);
    }
    t.expect(gc.has_value(), "no 30-op coarsened graph");
    if (!gc) {
        report(8, t, "");
        return;
    }
    ClusterSpec cs;
    cs.num_devices = K;
    cs.mem_min = 1ull << 30;
    cs.mem_max = 2ull << 30;
    cs.link_prob = 0.5;
    const auto c = gen_cluster(cs, seed);
    const auto mesh = effective_bandwidth(c);
    SolveBudget budget;
    budget.gap = 0.05;
    budget.time_limit_s = 120.0;
    const auto t0 = Clock::now();
    const auto sol = solve_exact(Instance(*gc, c, mesh), budget);
    const double elapsed = seconds_since(t0);
    t.expect(sol.placement.device_of.size() == 30, "placement incomplete");
    t.expect(std::isfinite(sol.objective_s), "no incumbent");
    t.expect(elapsed <= 120.0 + 5.0, "budget overrun " + fmt(elapsed));
    const auto sim = simulate(*gc, c, mesh, sol.placement);
    t.expect(sim.makespan_s == sol.objective_s, "simulated " + fmt(sim.makespan_s));
    t.expect(check_feasibility(sim.schedule, *gc, c, mesh).empty(), "simulated schedule violations");
    t.expect(check_feasibility(sol.schedule, *gc, c, mesh).empty(), "solution schedule violations");
    const auto etf = greedy_place(Instance(*gc, c, mesh), BaselineKind::EarliestFinish).objective_s;
    report(8, t, "30 ops, 4 devices: status " + std::string(to_string(sol.status)) + ", makespan " +
                     fmt(sol.objective_s) + " s (etf " + fmt(etf) + " s), " + std::to_string(sol.stats.nodes) +
                     " nodes in " + fmt(elapsed) + " s");
}

}  // namespace

int main() {
    try {
        const auto cases = criterion1();
        criterion2(cases);
        criterion3();
        criterion4();
        criterion5();
        criterion6();
        criterion7();
        criterion8();
    } catch (const std::exception& e) {
        std::cout << "aborted: " << e.what() << std::endl;
        return 2;
    }
    std::cout << (failures ? "FAILED " + std::to_string(failures) + " criteria" : std::string("all criteria passed"))
              << std::endl;
    return failures ? 1 : 0;
}
