#include "hetplace/io.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "hetplace/errors.hpp"

namespace hetplace::io {

using nlohmann::json;

namespace {

json parse_text(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(e.what());
    }
}

// Runs a reader and turns nlohmann type/key errors into ParseError.
template <typename F>
auto guarded(const char* what, F&& f) {
    try {
        return f();
    } catch (const json::exception& e) {
        throw ParseError(std::string(what) + ": " + e.what());
    }
}

const json& require(const json& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) throw ParseError(std::string("missing field '") + key + "'");
    return j.at(key);
}

DeviceId parse_device_key(const std::string& key) {
    try {
        std::size_t used = 0;
        const int v = std::stoi(key, &used);
        if (used != key.size()) throw ParseError("bad device id '" + key + "'");
        return v;
    } catch (const std::logic_error&) {
        throw ParseError("bad device id '" + key + "'");
    }
}

Seconds non_negative(double v, const char* what) {
    if (!(v >= 0.0)) throw ParseError(std::string(what) + " must be non-negative");
    return v;
}

}  // namespace

CompGraph parse_graph(const std::string& text) {
    const json j = parse_text(text);
    return guarded("graph", [&] {
        if (j.contains("schema") && j.at("schema").get<int>() != kGraphSchema)
            throw ParseError("unsupported graph schema " + j.at("schema").dump());
        std::vector<OpNode> nodes;
        for (const auto& jn : require(j, "nodes")) {
            OpNode n;
            n.id = require(jn, "id").get<NodeId>();
            n.op_type = require(jn, "op_type").get<std::string>();
            n.mem_bytes = require(jn, "mem_bytes").get<Bytes>();
            for (const auto& [k, v] : require(jn, "compute_time").items())
                n.compute_time[parse_device_key(k)] = non_negative(v.get<double>(), "compute_time");
            if (jn.contains("members")) n.members = jn.at("members").get<std::vector<NodeId>>();
            if (jn.contains("tag")) n.tag = node_tag_from_string(jn.at("tag").get<std::string>());
            nodes.push_back(std::move(n));
        }
        std::vector<FlowEdge> edges;
        if (j.contains("edges"))
            for (const auto& je : j.at("edges"))
                edges.push_back({require(je, "src").get<NodeId>(), require(je, "dst").get<NodeId>(),
                                 require(je, "payload_bytes").get<Bytes>()});
        return CompGraph(std::move(nodes), std::move(edges));
    });
}

std::string dump_graph(const CompGraph& g) {
    json nodes = json::array();
    for (const auto& n : g.nodes()) {
        json ct = json::object();
        for (const auto& [k, t] : n.compute_time) ct[std::to_string(k)] = t;
        json jn = {{"id", n.id}, {"op_type", n.op_type}, {"mem_bytes", n.mem_bytes}, {"compute_time", ct}};
        if (n.members != std::vector<NodeId>{n.id} || n.tag != NodeTag::Plain) {
            jn["members"] = n.members;
            jn["tag"] = std::string(to_string(n.tag));
        }
        nodes.push_back(std::move(jn));
    }
    json edges = json::array();
    for (const auto& e : g.edges()) edges.push_back({{"src", e.src}, {"dst", e.dst}, {"payload_bytes", e.payload_bytes}});
    json j = {{"schema", kGraphSchema}, {"nodes", nodes}, {"edges", edges}};
    return j.dump(2) + "\n";
}

Cluster parse_cluster(const std::string& text) {
    const json j = parse_text(text);
    return guarded("cluster", [&] {
        std::vector<Device> devices;
        for (const auto& jd : require(j, "devices"))
            devices.push_back({require(jd, "id").get<DeviceId>(), require(jd, "mem_bytes").get<Bytes>()});
        std::vector<Link> links;
        if (j.contains("links"))
            for (const auto& jl : j.at("links"))
                links.push_back({require(jl, "src").get<DeviceId>(), require(jl, "dst").get<DeviceId>(),
                                 require(jl, "bandwidth_Bps").get<double>()});
        return Cluster(std::move(devices), std::move(links));
    });
}

std::string dump_cluster(const Cluster& c) {
    json devices = json::array();
    for (const auto& d : c.devices()) devices.push_back({{"id", d.id}, {"mem_bytes", d.mem_bytes}});
    json links = json::array();
    for (const auto& l : c.links()) links.push_back({{"src", l.src}, {"dst", l.dst}, {"bandwidth_Bps", l.bandwidth_Bps}});
    return json{{"devices", devices}, {"links", links}}.dump(2) + "\n";
}

FusionRuleSet parse_rules(const std::string& text) {
    const json j = parse_text(text);
    return guarded("rules", [&] {
        std::vector<FusionRule> rules;
        for (const auto& jr : require(j, "rules"))
            rules.push_back({require(jr, "id").get<int>(), require(jr, "pattern").get<std::vector<std::string>>()});
        return FusionRuleSet(std::move(rules));
    });
}

std::string dump_rules(const FusionRuleSet& rules) {
    json arr = json::array();
    for (const auto& r : rules.rules()) arr.push_back({{"id", r.id}, {"pattern", r.pattern}});
    return json{{"rules", arr}}.dump(2) + "\n";
}

CostOverrides parse_overrides(const std::string& text) {
    const json j = parse_text(text);
    return guarded("overrides", [&] {
        CostOverrides o;
        for (const auto& jo : require(j, "overrides"))
            o.set(require(jo, "types").get<std::vector<std::string>>(), require(jo, "device").get<DeviceId>(),
                  non_negative(require(jo, "seconds").get<double>(), "seconds"));
        return o;
    });
}

std::string dump_overrides(const CostOverrides& o) {
    json arr = json::array();
    o.for_each([&](const std::vector<std::string>& types, DeviceId k, Seconds s) {
        arr.push_back({{"types", types}, {"device", k}, {"seconds", s}});
    });
    return json{{"overrides", arr}}.dump(2) + "\n";
}

PlacementFile parse_placement(const std::string& text) {
    const json j = parse_text(text);
    return guarded("placement", [&] {
        PlacementFile p;
        for (const auto& ja : require(j, "assignments"))
            p.placement.device_of[require(ja, "op").get<NodeId>()] = require(ja, "device").get<DeviceId>();
        if (j.contains("schedule")) {
            for (const auto& js : j.at("schedule")) {
                TaskTiming t;
                t.node = require(js, "node").get<NodeId>();
                t.start = require(js, "start_s").get<double>();
                t.end = require(js, "end_s").get<double>();
                t.is_flow = js.value("kind", std::string("op")) == "flow";
                if (js.contains("device")) t.device = js.at("device").get<DeviceId>();
                if (js.contains("channel")) {
                    const auto ch = js.at("channel").get<std::vector<DeviceId>>();
                    if (ch.size() != 2) throw ParseError("channel must have two devices");
                    t.channel = Channel{ch[0], ch[1]};
                }
                p.schedule.tasks.push_back(t);
            }
            std::ranges::sort(p.schedule.tasks, {}, &TaskTiming::node);
        }
        p.makespan_s = j.value("makespan_s", 0.0);
        p.method = j.value("method", std::string());
        p.status = j.value("status", std::string());
        return p;
    });
}

std::string dump_placement(const PlacementFile& p) {
    json assignments = json::array();
    for (const auto& [op, k] : p.placement.device_of) assignments.push_back({{"op", op}, {"device", k}});
    json schedule = json::array();
    for (const auto& t : p.schedule.tasks) {
        json js = {{"node", t.node}, {"kind", t.is_flow ? "flow" : "op"}, {"start_s", t.start}, {"end_s", t.end}};
        if (t.device) js["device"] = *t.device;
        if (t.channel) js["channel"] = {t.channel->first, t.channel->second};
        schedule.push_back(std::move(js));
    }
    json j = {{"assignments", assignments}, {"schedule", schedule}, {"makespan_s", p.makespan_s}};
    if (!p.method.empty()) j["method"] = p.method;
    if (!p.status.empty()) j["status"] = p.status;
    return j.dump(2) + "\n";
}

PlacementFile to_placement_file(const Solution& s, std::string method) {
    return {s.placement, s.schedule, s.objective_s, std::move(method), std::string(to_string(s.status))};
}

std::string dump_trace(const SimResult& r, const std::vector<Violation>& violations) {
    json events = json::array();
    for (const auto& e : r.trace) {
        json je = {{"time_s", e.time_s}, {"kind", std::string(to_string(e.kind))}, {"node", e.node}};
        if (e.device) je["device"] = *e.device;
        if (e.channel) je["channel"] = {e.channel->first, e.channel->second};
        events.push_back(std::move(je));
    }
    json viol = json::array();
    for (const auto& v : violations) viol.push_back({{"kind", std::string(to_string(v.kind))}, {"details", v.details}});
    return json{{"makespan_s", r.makespan_s}, {"events", events}, {"violations", viol}}.dump(2) + "\n";
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw Error("failed writing " + path.string());
}

}  // namespace hetplace::io
