#include "hetplace/bench.hpp"

#include <algorithm>
#include <chrono>
#include <map>
#include <sstream>

#include <json.hpp>

#include "hetplace/baselines.hpp"
#include "hetplace/errors.hpp"
#include "hetplace/io.hpp"
#include "hetplace/milp.hpp"
#include "hetplace/simulator.hpp"

namespace hetplace {

bool BenchReport::all_ok() const {
    return std::ranges::all_of(cells, [](const BenchCell& c) { return c.error.empty() && c.violations == 0; });
}

Solution run_method(const std::string& method, const Instance& inst, const SolveBudget& budget) {
    if (method == "exact") return solve_exact(inst, budget);
    if (method == "etf") return greedy_place(inst, BaselineKind::EarliestFinish);
    if (method == "sct") return greedy_place(inst, BaselineKind::EarliestStart);
    throw Error("unknown method '" + method + "'");
}

namespace {

BenchCell run_cell(const std::string& name, const std::string& variant, const CompGraph& g, const std::string& method,
                   const BenchConfig& cfg, const EffectiveMesh& mesh) {
    BenchCell cell;
    cell.graph = name;
    cell.variant = variant;
    cell.method = method;
    cell.ops = g.num_nodes();
    cell.edges = g.num_edges();
    try {
        cell.binaries = count_binaries(g, cfg.cluster.size());
        const Instance inst(g, cfg.cluster, mesh);
        std::vector<double> times;
        Solution sol;
        for (int r = 0; r < std::max(1, cfg.repeats); ++r) {
            const auto t0 = std::chrono::steady_clock::now();
            sol = run_method(method, inst, cfg.budget);
            times.push_back(std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
        }
        std::ranges::sort(times);
        cell.gen_time_s = times[times.size() / 2];
        cell.status = std::string(to_string(sol.status));
        const auto sim = simulate(g, cfg.cluster, mesh, sol.placement);
        cell.makespan_s = sim.makespan_s;
        cell.violations = check_feasibility(sim.schedule, g, cfg.cluster, mesh).size();
        if (sim.makespan_s != sol.objective_s) cell.error = "simulated makespan differs from solver objective";
    } catch (const std::exception& e) {
        cell.error = e.what();
    }
    return cell;
}

std::string csv_field(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

std::string num(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

BenchReport run_bench(const BenchConfig& cfg) {
    BenchReport report;
    EffectiveMesh mesh = effective_bandwidth(cfg.cluster);
    for (const auto& bg : cfg.graphs) {
        std::vector<std::pair<std::string, CompGraph>> variants;
        if (cfg.raw) variants.emplace_back("raw", bg.graph);
        if (cfg.coarsened) {
            try {
                variants.emplace_back("coarsened", gcof(bg.graph, cfg.rules, cfg.overrides));
            } catch (const std::exception& e) {
                BenchCell cell;
                cell.graph = bg.name;
                cell.variant = "coarsened";
                cell.method = "gcof";
                cell.error = e.what();
                report.cells.push_back(cell);
            }
        }
        for (const auto& [variant, g] : variants) {
            const auto first = report.cells.size();
            for (const auto& m : cfg.methods) report.cells.push_back(run_cell(bg.name, variant, g, m, cfg, mesh));
            std::optional<Seconds> base;
            for (auto i = first; i < report.cells.size(); ++i)
                if (report.cells[i].method == cfg.baseline && report.cells[i].error.empty())
                    base = report.cells[i].makespan_s;
            for (auto i = first; i < report.cells.size(); ++i) {
                auto& c = report.cells[i];
                if (base && c.makespan_s && *c.makespan_s > 0.0) c.speedup = *base / *c.makespan_s;
            }
        }
    }
    return report;
}

void write_csv(const BenchReport& r, std::ostream& os) {
    os << "graph,variant,method,ops,edges,binaries,gen_time_s,makespan_s,speedup,status,violations,error\n";
    for (const auto& c : r.cells) {
        os << csv_field(c.graph) << ',' << c.variant << ',' << c.method << ',' << c.ops << ',' << c.edges << ','
           << c.binaries << ',' << num(c.gen_time_s) << ',' << (c.makespan_s ? num(*c.makespan_s) : "") << ','
           << (c.speedup ? num(*c.speedup) : "") << ',' << c.status << ',' << c.violations << ','
           << csv_field(c.error) << '\n';
    }
}

std::string to_json(const BenchReport& r) {
    using nlohmann::json;
    json cells = json::array();
    for (const auto& c : r.cells) {
        json j = {{"graph", c.graph},       {"variant", c.variant},       {"method", c.method},
                  {"ops", c.ops},           {"edges", c.edges},           {"binaries", c.binaries},
                  {"gen_time_s", c.gen_time_s}, {"status", c.status},    {"violations", c.violations}};
        j["makespan_s"] = c.makespan_s ? json(*c.makespan_s) : json(nullptr);
        j["speedup"] = c.speedup ? json(*c.speedup) : json(nullptr);
        if (!c.error.empty()) j["error"] = c.error;
        cells.push_back(std::move(j));
    }
    return json{{"cells", cells}}.dump(2) + "\n";
}

void write_report(const BenchReport& r, const std::filesystem::path& dir) {
    std::ostringstream csv;
    write_csv(r, csv);
    io::write_file(dir / "bench.csv", csv.str());
    io::write_file(dir / "bench.json", to_json(r));

    std::ostringstream speed;
    std::ostringstream gen;
    speed << "# graph variant method speedup\n";
    gen << "# graph method raw_gen_time_s coarsened_gen_time_s\n";
    std::map<std::pair<std::string, std::string>, std::pair<std::string, std::string>> gen_rows;
    for (const auto& c : r.cells) {
        if (c.speedup) speed << c.graph << ' ' << c.variant << ' ' << c.method << ' ' << num(*c.speedup) << '\n';
        if (!c.error.empty()) continue;
        auto& row = gen_rows[{c.graph, c.method}];
        (c.variant == "raw" ? row.first : row.second) = num(c.gen_time_s);
    }
    for (const auto& [key, row] : gen_rows)
        gen << key.first << ' ' << key.second << ' ' << (row.first.empty() ? "nan" : row.first) << ' '
            << (row.second.empty() ? "nan" : row.second) << '\n';
    io::write_file(dir / "speedup.dat", speed.str());
    io::write_file(dir / "gentime.dat", gen.str());
}

}  // namespace hetplace
