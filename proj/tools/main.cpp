#include <charconv>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hetplace/baselines.hpp"
#include "hetplace/bench.hpp"
#include "hetplace/errors.hpp"
#include "hetplace/fusion.hpp"
#include "hetplace/io.hpp"
#include "hetplace/milp.hpp"
#include "hetplace/simulator.hpp"
#include "hetplace/solver.hpp"
#include "hetplace/synthetic.hpp"

namespace hp = hetplace;

namespace {

// "90", "90s", "1.5m", "2h".
std::optional<double> parse_budget(const std::string& text) {
    if (text.empty() || text == "none" || text == "inf") return std::nullopt;
    double scale = 1.0;
    std::string digits = text;
    switch (text.back()) {
        case 's': digits.pop_back(); break;
        case 'm': scale = 60.0; digits.pop_back(); break;
        case 'h': scale = 3600.0; digits.pop_back(); break;
        default: break;
    }
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), v);
    if (ec != std::errc() || ptr != digits.data() + digits.size() || v < 0.0)
        throw CLI::ValidationError("--budget", "expected a duration such as 60s, got '" + text + "'");
    return v * scale;
}

struct Common {
    std::string graph;
    std::string cluster;
    std::string rules;
    std::string overrides;
};

hp::FusionRuleSet load_rules(const std::string& path) {
    return path.empty() ? hp::FusionRuleSet::eigen_gpu_defaults() : hp::io::parse_rules(hp::io::read_file(path));
}

hp::CostOverrides load_overrides(const std::string& path) {
    return path.empty() ? hp::CostOverrides{} : hp::io::parse_overrides(hp::io::read_file(path));
}

hp::CompGraph load_graph(const std::string& path) {
    auto g = hp::io::parse_graph(hp::io::read_file(path));
    hp::validate_dag(g);
    if (!g.is_weakly_connected()) std::cerr << "warning: graph " << path << " is not weakly connected\n";
    return g;
}

void emit(const std::string& out, const std::string& text) {
    if (out.empty() || out == "-")
        std::cout << text;
    else
        hp::io::write_file(out, text);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Makespan-minimal placement of operator graphs on heterogeneous devices"};
    app.require_subcommand(1);
    app.fallthrough();
    std::uint64_t seed = 1;
    double gap = 0.0;
    std::string budget_text;
    std::string method = "exact";
    app.add_option("--seed", seed, "Seed for synthetic generation")->capture_default_str();
    app.add_option("--gap", gap, "Relative optimality gap")->check(CLI::Range(0.0, 0.999999))->capture_default_str();
    app.add_option("--budget", budget_text, "Solver time limit, e.g. 60s");
    app.add_option("--method", method, "Placement method")
        ->check(CLI::IsMember({"exact", "etf", "sct"}))
        ->capture_default_str();

    Common common;
    std::string out;

    auto* coarsen = app.add_subcommand("coarsen", "Fuse operators according to fusion rules");
    std::string trace_out;
    coarsen->add_option("--graph", common.graph)->required()->check(CLI::ExistingFile);
    coarsen->add_option("--rules", common.rules, "Rule file (default: conv/bn/relu/add set)")->check(CLI::ExistingFile);
    coarsen->add_option("--overrides", common.overrides)->check(CLI::ExistingFile);
    coarsen->add_option("--out", out)->required();
    coarsen->add_option("--trace", trace_out, "Write fusion decisions as text");

    auto* place = app.add_subcommand("place", "Compute a placement");
    bool do_coarsen = false;
    place->add_option("--graph", common.graph)->required()->check(CLI::ExistingFile);
    place->add_option("--cluster", common.cluster)->required()->check(CLI::ExistingFile);
    place->add_option("--rules", common.rules)->check(CLI::ExistingFile);
    place->add_option("--overrides", common.overrides)->check(CLI::ExistingFile);
    place->add_flag("--coarsen", do_coarsen, "Coarsen the graph first");
    place->add_option("--out", out)->required();

    auto* sim = app.add_subcommand("simulate", "Replay a placement and check it");
    std::string placement_path;
    sim->add_option("--graph", common.graph)->required()->check(CLI::ExistingFile);
    sim->add_option("--cluster", common.cluster)->required()->check(CLI::ExistingFile);
    sim->add_option("--placement", placement_path)->required()->check(CLI::ExistingFile);
    sim->add_option("--out", out)->required();

    auto* lp = app.add_subcommand("export-lp", "Write the placement model in LP format");
    lp->add_option("--graph", common.graph)->required()->check(CLI::ExistingFile);
    lp->add_option("--cluster", common.cluster)->required()->check(CLI::ExistingFile);
    lp->add_option("--out", out)->required();

    auto* gen = app.add_subcommand("gen", "Generate a synthetic graph (and optionally a cluster)");
    hp::SyntheticSpec spec;
    std::string cluster_out;
    gen->add_option("--depth", spec.depth)->capture_default_str();
    gen->add_option("--width", spec.width)->capture_default_str();
    gen->add_option("--density", spec.density)->capture_default_str();
    gen->add_option("--skip", spec.skip_prob, "Extra edge probability")->capture_default_str();
    gen->add_option("--skip-window", spec.skip_window, "Layers an extra edge may span")->capture_default_str();
    gen->add_option("--devices", spec.num_devices)->capture_default_str();
    gen->add_option("--out", out)->required();
    gen->add_option("--cluster-out", cluster_out);

    auto* bench = app.add_subcommand("bench", "Run methods over graphs and write reports");
    std::vector<std::string> bench_graphs;
    std::vector<std::string> methods = {"exact", "etf", "sct"};
    int synthetic = 0;
    int repeats = 3;
    hp::SyntheticSpec bench_spec;
    bench->add_option("--graph", bench_graphs, "Graph files")->check(CLI::ExistingFile);
    bench->add_option("--cluster", common.cluster)->required()->check(CLI::ExistingFile);
    bench->add_option("--rules", common.rules)->check(CLI::ExistingFile);
    bench->add_option("--overrides", common.overrides)->check(CLI::ExistingFile);
    bench->add_option("--methods", methods)->check(CLI::IsMember({"exact", "etf", "sct"}));
    bench->add_option("--synthetic", synthetic, "Number of generated graphs added")->capture_default_str();
    bench->add_option("--depth", bench_spec.depth)->capture_default_str();
    bench->add_option("--width", bench_spec.width)->capture_default_str();
    bench->add_option("--density", bench_spec.density)->capture_default_str();
    bench->add_option("--repeats", repeats)->capture_default_str();
    bench->add_option("--out-dir", out)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? 0 : 1;
    }

    try {
        hp::SolveBudget budget;
        budget.time_limit_s = parse_budget(budget_text);
        budget.gap = gap;

        if (coarsen->parsed()) {
            const auto g = load_graph(common.graph);
            const auto res = hp::coarsen(g, load_rules(common.rules), load_overrides(common.overrides));
            emit(out, hp::io::dump_graph(res.graph));
            if (!trace_out.empty()) {
                std::string text;
                for (const auto& e : res.trace) {
                    text += std::string(hp::to_string(e.action)) + " pass=" + std::to_string(e.pass) + " rule=" +
                            std::to_string(e.rule) + " parts=";
                    for (std::size_t i = 0; i < e.parts.size(); ++i)
                        text += (i ? "," : "") + std::to_string(e.parts[i]);
                    text += " types=" + hp::join_types(e.types) + "\n";
                }
                hp::io::write_file(trace_out, text);
            }
            std::cerr << g.num_nodes() << " ops -> " << res.graph.num_nodes() << " ops\n";
            return 0;
        }
        if (place->parsed()) {
            auto g = load_graph(common.graph);
            if (do_coarsen) g = hp::gcof(g, load_rules(common.rules), load_overrides(common.overrides));
            const auto c = hp::io::parse_cluster(hp::io::read_file(common.cluster));
            const hp::Instance inst(g, c, hp::effective_bandwidth(c));
            const auto sol = hp::run_method(method, inst, budget);
            emit(out, hp::io::dump_placement(hp::io::to_placement_file(sol, method)));
            std::cerr << "makespan " << sol.objective_s << " s (" << hp::to_string(sol.status) << ")\n";
            return sol.status == hp::SolveStatus::Optimal || sol.status == hp::SolveStatus::Feasible ? 0 : 2;
        }
        if (sim->parsed()) {
            const auto g = load_graph(common.graph);
            const auto c = hp::io::parse_cluster(hp::io::read_file(common.cluster));
            const auto mesh = hp::effective_bandwidth(c);
            const auto p = hp::io::parse_placement(hp::io::read_file(placement_path));
            const auto res = hp::simulate(g, c, mesh, p.placement);
            const auto viol = hp::check_feasibility(res.schedule, g, c, mesh);
            emit(out, hp::io::dump_trace(res, viol));
            std::cerr << "makespan " << res.makespan_s << " s, " << viol.size() << " violations\n";
            return viol.empty() ? 0 : 3;
        }
        if (lp->parsed()) {
            const auto g = load_graph(common.graph);
            const auto c = hp::io::parse_cluster(hp::io::read_file(common.cluster));
            const auto m = hp::build_model(g, c, hp::effective_bandwidth(c));
            emit(out, hp::to_lp_string(m));
            std::cerr << m.vars().size() << " variables, " << m.rows().size() << " rows\n";
            return 0;
        }
        if (gen->parsed()) {
            emit(out, hp::io::dump_graph(hp::gen_synthetic(spec, seed)));
            if (!cluster_out.empty()) {
                hp::ClusterSpec cs;
                cs.num_devices = spec.num_devices;
                hp::io::write_file(cluster_out, hp::io::dump_cluster(hp::gen_cluster(cs, seed)));
            }
            return 0;
        }
        if (bench->parsed()) {
            hp::BenchConfig cfg;
            cfg.cluster = hp::io::parse_cluster(hp::io::read_file(common.cluster));
            cfg.methods = methods;
            cfg.budget = budget;
            cfg.rules = load_rules(common.rules);
            cfg.overrides = load_overrides(common.overrides);
            cfg.repeats = repeats;
            for (const auto& path : bench_graphs) cfg.graphs.push_back({path, load_graph(path)});
            bench_spec.num_devices = static_cast<int>(cfg.cluster.size());
            std::vector<hp::DeviceId> ids;
            for (int i = 0; i < synthetic; ++i) {
                auto g = hp::gen_synthetic(bench_spec, seed + static_cast<std::uint64_t>(i));
                // Generated times are keyed 1..K; rekey onto the cluster's ids.
                std::vector<hp::OpNode> nodes(g.nodes().begin(), g.nodes().end());
                for (auto& n : nodes) {
                    std::map<hp::DeviceId, hp::Seconds> ct;
                    std::size_t k = 0;
                    for (const auto& [_, t] : n.compute_time) ct[cfg.cluster.devices()[k++].id] = t;
                    n.compute_time = std::move(ct);
                }
                g = hp::CompGraph(std::move(nodes), {g.edges().begin(), g.edges().end()});
                cfg.graphs.push_back({"synthetic-" + std::to_string(seed + static_cast<std::uint64_t>(i)), g});
            }
            if (cfg.graphs.empty()) throw hp::Error("bench needs --graph or --synthetic");
            const auto report = hp::run_bench(cfg);
            hp::write_report(report, out);
            hp::write_csv(report, std::cout);
            return report.all_ok() ? 0 : 4;
        }
    } catch (const hp::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
