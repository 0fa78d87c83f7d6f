#include "hetplace/milp.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "hetplace/errors.hpp"

namespace hetplace {

std::string_view to_string(RowFamily f) {
    switch (f) {
        case RowFamily::Objective: return "objective";
        case RowFamily::Precedence: return "precedence";
        case RowFamily::Duration: return "duration";
        case RowFamily::Assignment: return "assignment";
        case RowFamily::Memory: return "memory";
        case RowFamily::NonOverlap: return "non-overlap";
        case RowFamily::FlowIndicator: return "flow-indicator";
        case RowFamily::Channel: return "channel";
        case RowFamily::Activation: return "activation";
        case RowFamily::FlowDuration: return "flow-duration";
        case RowFamily::FlowOrder: return "flow-order";
        case RowFamily::Congestion: return "congestion";
    }
    return "objective";
}

BigM big_m(const AugGraph& aug, const Cluster& c, const EffectiveMesh& mesh) {
    double h = 0.0;
    for (const auto& n : aug.op_nodes) {
        double worst = 0.0;
        for (const auto& d : c.devices()) {
            auto it = n.compute_time.find(d.id);
            if (it == n.compute_time.end()) throw MissingCost(n.id, d.id);
            worst = std::max(worst, it->second);
        }
        h += worst;
    }
    for (const auto& f : aug.flow_nodes) {
        double worst = 0.0;
        for (const auto& a : c.devices())
            for (const auto& b : c.devices())
                if (a.id != b.id) worst = std::max(worst, comm_time(f.payload_bytes, a.id, b.id, mesh));
        h += worst;
    }
    return {h, h, h, h};
}

std::optional<std::size_t> MilpModel::find_var(const std::string& name) const {
    auto it = by_name_.find(name);
    if (it == by_name_.end()) return std::nullopt;
    return it->second;
}

std::size_t MilpModel::count_vars(VarKind kind) const {
    return static_cast<std::size_t>(std::ranges::count(vars_, kind, &Variable::kind));
}

std::size_t MilpModel::count_rows(RowFamily family) const {
    return static_cast<std::size_t>(std::ranges::count(rows_, family, &Row::family));
}

std::size_t MilpModel::count_prefix(std::string_view prefix) const {
    return static_cast<std::size_t>(
        std::ranges::count_if(vars_, [&](const Variable& v) { return v.name.starts_with(prefix); }));
}

std::size_t MilpModel::x(NodeId op, DeviceId k) const { return x_.at({op, k}); }
std::size_t MilpModel::z(NodeId flow) const { return z_.at(flow); }
std::size_t MilpModel::start(NodeId node) const { return s_.at(node); }
std::size_t MilpModel::complete(NodeId node) const { return c_.at(node); }

std::optional<std::size_t> MilpModel::u(NodeId flow, DeviceId from, DeviceId to) const {
    auto it = u_.find({flow, from, to});
    if (it == u_.end()) return std::nullopt;
    return it->second;
}

std::optional<std::size_t> MilpModel::order_op(NodeId a, NodeId b) const {
    auto it = order_op_.find({std::min(a, b), std::max(a, b)});
    if (it == order_op_.end()) return std::nullopt;
    return it->second;
}

std::optional<std::size_t> MilpModel::order_flow(NodeId a, NodeId b) const {
    auto it = order_flow_.find({std::min(a, b), std::max(a, b)});
    if (it == order_flow_.end()) return std::nullopt;
    return it->second;
}

namespace {

std::string id_str(std::int64_t id) { return id < 0 ? "n" + std::to_string(-id) : std::to_string(id); }

// Accumulates terms, merging repeated variables and dropping zeros.
class RowBuilder {
public:
    RowBuilder& add(std::size_t var, double coef) {
        for (auto& t : terms_) {
            if (t.var == var) {
                t.coef += coef;
                return *this;
            }
        }
        terms_.push_back({var, coef});
        return *this;
    }

    std::vector<Term> take() {
        std::erase_if(terms_, [](const Term& t) { return t.coef == 0.0; });
        return std::move(terms_);
    }

private:
    std::vector<Term> terms_;
};

}  // namespace

MilpModel build_model(const CompGraph& g, const Cluster& c, const EffectiveMesh& mesh) {
    MilpModel m;
    m.aug_ = augment(g);
    const auto& aug = m.aug_;
    for (const auto& d : c.devices()) m.devices_.push_back(d.id);

    Bytes need = 0;
    for (const auto& n : aug.op_nodes) need += n.mem_bytes;
    if (need > c.total_memory()) throw InfeasibleMemory(need, c.total_memory());
    m.big_m_ = big_m(aug, c, mesh);
    const BigM M = m.big_m_;
    const double H = M.horizon;

    auto var = [&](std::string name, VarKind kind, double ub) {
        const auto idx = m.vars_.size();
        m.by_name_.emplace(name, idx);
        m.vars_.push_back({std::move(name), kind, 0.0, ub});
        return idx;
    };
    auto row = [&](std::string name, RowFamily fam, RowBuilder rb, Sense sense, double rhs) {
        m.rows_.push_back({std::move(name), fam, rb.take(), sense, rhs});
    };

    // Variables.
    for (const auto& n : aug.op_nodes)
        for (auto k : m.devices_) m.x_[{n.id, k}] = var("x_" + id_str(n.id) + "_" + id_str(k), VarKind::Binary, 1.0);
    for (const auto& f : aug.flow_nodes) m.z_[f.id] = var("z_" + id_str(f.id), VarKind::Binary, 1.0);
    for (const auto& f : aug.flow_nodes)
        for (auto a : m.devices_)
            for (auto b : m.devices_)
                if (a != b)
                    m.u_[{f.id, a, b}] =
                        var("u_" + id_str(f.id) + "_" + id_str(a) + "_" + id_str(b), VarKind::Binary, 1.0);
    std::vector<NodeId> all_nodes;
    for (const auto& n : aug.op_nodes) all_nodes.push_back(n.id);
    for (const auto& f : aug.flow_nodes) all_nodes.push_back(f.id);
    for (auto id : all_nodes) m.s_[id] = var("S_" + id_str(id), VarKind::Continuous, H);
    for (auto id : all_nodes) m.c_[id] = var("C_" + id_str(id), VarKind::Continuous, H);
    m.objective_ = var("T", VarKind::Continuous, H);

    const SuccClosure op_closure = succ_closure(g);
    const SuccClosure aug_closure = succ_closure(aug);
    for (std::size_t i = 0; i < aug.op_nodes.size(); ++i)
        for (std::size_t j = i + 1; j < aug.op_nodes.size(); ++j) {
            const auto a = aug.op_nodes[i].id;
            const auto b = aug.op_nodes[j].id;
            if (!op_closure.related(a, b))
                m.order_op_[{a, b}] = var("dord_" + id_str(a) + "_" + id_str(b), VarKind::Binary, 1.0);
        }
    for (std::size_t i = 0; i < aug.flow_nodes.size(); ++i)
        for (std::size_t j = i + 1; j < aug.flow_nodes.size(); ++j) {
            const auto a = aug.flow_nodes[i].id;
            const auto b = aug.flow_nodes[j].id;
            if (!aug_closure.related(a, b))
                m.order_flow_[{a, b}] = var("dcom_" + id_str(a) + "_" + id_str(b), VarKind::Binary, 1.0);
        }

    // Makespan: T >= C_i for every operator.
    for (const auto& n : aug.op_nodes)
        row("obj_" + id_str(n.id), RowFamily::Objective, RowBuilder().add(m.objective_, 1).add(m.c_[n.id], -1),
            Sense::GreaterEqual, 0.0);

    // Precedence on direct links of the augmented graph.
    for (const auto& [a, b] : aug.links)
        row("prec_" + id_str(a) + "_" + id_str(b), RowFamily::Precedence,
            RowBuilder().add(m.c_[a], 1).add(m.s_[b], -1), Sense::LessEqual, 0.0);

    for (const auto& n : aug.op_nodes) {
        RowBuilder dur;
        dur.add(m.c_[n.id], 1).add(m.s_[n.id], -1);
        for (auto k : m.devices_) {
            auto it = n.compute_time.find(k);
            if (it == n.compute_time.end()) throw MissingCost(n.id, k);
            dur.add(m.x_[{n.id, k}], -it->second);
        }
        row("dur_" + id_str(n.id), RowFamily::Duration, std::move(dur), Sense::Equal, 0.0);
    }
    for (const auto& n : aug.op_nodes) {
        RowBuilder one;
        for (auto k : m.devices_) one.add(m.x_[{n.id, k}], 1);
        row("assign_" + id_str(n.id), RowFamily::Assignment, std::move(one), Sense::Equal, 1.0);
    }
    for (const auto& d : c.devices()) {
        RowBuilder mem;
        for (const auto& n : aug.op_nodes) mem.add(m.x_[{n.id, d.id}], static_cast<double>(n.mem_bytes));
        row("mem_" + id_str(d.id), RowFamily::Memory, std::move(mem), Sense::LessEqual,
            static_cast<double>(d.mem_bytes));
    }

    // Non-overlap of unrelated operators sharing a device.
    for (const auto& [pair, delta] : m.order_op_) {
        const auto [i, j] = pair;
        for (auto k : m.devices_) {
            const auto xi = m.x_[{i, k}];
            const auto xj = m.x_[{j, k}];
            const std::string tag = id_str(i) + "_" + id_str(j) + "_" + id_str(k);
            // S_i >= C_j - Ms*d - Ml*(2 - x_ik - x_jk)
            row("novl_" + tag + "_a", RowFamily::NonOverlap,
                RowBuilder().add(m.s_[i], 1).add(m.c_[j], -1).add(delta, M.Ms).add(xi, -M.Ml).add(xj, -M.Ml),
                Sense::GreaterEqual, -2 * M.Ml);
            // S_j >= C_i - Ms*(1-d) - Ml*(2 - x_ik - x_jk)
            row("novl_" + tag + "_b", RowFamily::NonOverlap,
                RowBuilder().add(m.s_[j], 1).add(m.c_[i], -1).add(delta, -M.Ms).add(xi, -M.Ml).add(xj, -M.Ml),
                Sense::GreaterEqual, -M.Ms - 2 * M.Ml);
        }
    }

    // Communication.
    for (const auto& f : aug.flow_nodes) {
        const auto q = f.id;
        const auto zq = m.z_[q];
        for (auto k : m.devices_) {
            const auto xi = m.x_[{f.src, k}];
            const auto xj = m.x_[{f.dst, k}];
            const std::string tag = id_str(q) + "_" + id_str(k);
            row("zub_" + tag, RowFamily::FlowIndicator, RowBuilder().add(zq, 1).add(xi, 1).add(xj, 1),
                Sense::LessEqual, 2.0);
            row("zlo_" + tag + "_a", RowFamily::FlowIndicator, RowBuilder().add(zq, 1).add(xi, -1).add(xj, 1),
                Sense::GreaterEqual, 0.0);
            row("zlo_" + tag + "_b", RowFamily::FlowIndicator, RowBuilder().add(zq, 1).add(xi, 1).add(xj, -1),
                Sense::GreaterEqual, 0.0);
        }
        RowBuilder chan;
        for (auto a : m.devices_)
            for (auto b : m.devices_)
                if (a != b) chan.add(m.u_[{q, a, b}], 1);
        chan.add(zq, -1);
        row("chan_" + id_str(q), RowFamily::Channel, std::move(chan), Sense::Equal, 0.0);
        for (auto a : m.devices_)
            for (auto b : m.devices_) {
                if (a == b) continue;
                row("act_" + id_str(q) + "_" + id_str(a) + "_" + id_str(b), RowFamily::Activation,
                    RowBuilder().add(m.u_[{q, a, b}], 1).add(m.x_[{f.src, a}], -1).add(m.x_[{f.dst, b}], -1),
                    Sense::GreaterEqual, -1.0);
            }
        RowBuilder fdur;
        fdur.add(m.c_[q], 1).add(m.s_[q], -1);
        for (auto a : m.devices_)
            for (auto b : m.devices_)
                if (a != b) fdur.add(m.u_[{q, a, b}], -comm_time(f.payload_bytes, a, b, mesh));
        row("fdur_" + id_str(q), RowFamily::FlowDuration, std::move(fdur), Sense::Equal, 0.0);
        row("fpos_" + id_str(q), RowFamily::FlowOrder, RowBuilder().add(m.c_[q], 1).add(m.s_[q], -1),
            Sense::GreaterEqual, 0.0);
    }

    // Congestion: unrelated flows leaving the same device, or entering the
    // same device, are serialised.
    for (const auto& [pair, delta] : m.order_flow_) {
        const auto [q, r] = pair;
        const auto& fq = aug.flow(q);
        const auto& fr = aug.flow(r);
        for (auto k : m.devices_) {
            const auto xa = m.x_[{fq.src, k}];
            const auto xb = m.x_[{fq.dst, k}];
            const auto xc = m.x_[{fr.src, k}];
            const auto xd = m.x_[{fr.dst, k}];
            const std::string tag = id_str(q) + "_" + id_str(r) + "_" + id_str(k);
            // sign = +1: activation x_a + x_c - x_b - x_d - 2; sign = -1: x_b + x_d - x_a - x_c - 2.
            for (int side = 0; side < 2; ++side) {
                const double sg = side == 0 ? 1.0 : -1.0;
                auto activation = [&](RowBuilder rb) {
                    rb.add(xa, -sg * M.Mr).add(xc, -sg * M.Mr).add(xb, sg * M.Mr).add(xd, sg * M.Mr);
                    return rb;
                };
                const std::string suffix = side == 0 ? "src" : "dst";
                // S_q >= C_r - Ms*d - Ml*(2 - z_q - z_r) + Mr*(act)
                row("cong_" + tag + "_" + suffix + "_a", RowFamily::Congestion,
                    activation(RowBuilder()
                                   .add(m.s_[q], 1)
                                   .add(m.c_[r], -1)
                                   .add(delta, M.Ms)
                                   .add(m.z_[q], -M.Ml)
                                   .add(m.z_[r], -M.Ml)),
                    Sense::GreaterEqual, -2 * M.Ml - 2 * M.Mr);
                // S_r >= C_q - Ms*(1-d) - Ml*(2 - z_q - z_r) + Mr*(act)
                row("cong_" + tag + "_" + suffix + "_b", RowFamily::Congestion,
                    activation(RowBuilder()
                                   .add(m.s_[r], 1)
                                   .add(m.c_[q], -1)
                                   .add(delta, -M.Ms)
                                   .add(m.z_[q], -M.Ml)
                                   .add(m.z_[r], -M.Ml)),
                    Sense::GreaterEqual, -M.Ms - 2 * M.Ml - 2 * M.Mr);
            }
        }
    }
    return m;
}

std::size_t count_binaries(const CompGraph& g, std::size_t num_devices) {
    const auto K = num_devices;
    const auto aug = augment(g);
    const auto op_cl = succ_closure(g);
    const auto aug_cl = succ_closure(aug);
    std::size_t op_pairs = 0;
    std::size_t flow_pairs = 0;
    const auto ops = g.nodes();
    for (std::size_t i = 0; i < ops.size(); ++i)
        for (std::size_t j = i + 1; j < ops.size(); ++j) op_pairs += op_cl.related(ops[i].id, ops[j].id) ? 0 : 1;
    for (std::size_t i = 0; i < aug.flow_nodes.size(); ++i)
        for (std::size_t j = i + 1; j < aug.flow_nodes.size(); ++j)
            flow_pairs += aug_cl.related(aug.flow_nodes[i].id, aug.flow_nodes[j].id) ? 0 : 1;
    const auto beta = g.num_edges();
    return g.num_nodes() * K + beta + beta * K * (K - 1) + op_pairs + flow_pairs;
}

namespace {

std::string num(double v) {
    if (v == 0.0) return "0";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

}  // namespace

void export_lp(const MilpModel& m, std::ostream& os) {
    const auto& vars = m.vars();
    os << "\\ placement model: " << m.aug().op_nodes.size() << " ops, " << m.aug().flow_nodes.size()
       << " flows, " << m.devices().size() << " devices\n";
    os << "Minimize\n obj: " << vars[m.objective_var()].name << "\n";
    os << "Subject To\n";
    constexpr std::size_t kTermsPerLine = 6;
    for (const auto& r : m.rows()) {
        os << ' ' << r.name << ':';
        if (r.terms.empty()) os << " 0 " << vars[m.objective_var()].name;
        for (std::size_t i = 0; i < r.terms.size(); ++i) {
            if (i > 0 && i % kTermsPerLine == 0) os << "\n  ";
            const auto& t = r.terms[i];
            const double mag = std::abs(t.coef);
            os << (t.coef < 0 ? " - " : (i == 0 ? " " : " + "));
            if (mag != 1.0) os << num(mag) << ' ';
            os << vars[t.var].name;
        }
        switch (r.sense) {
            case Sense::LessEqual: os << " <= "; break;
            case Sense::GreaterEqual: os << " >= "; break;
            case Sense::Equal: os << " = "; break;
        }
        os << num(r.rhs) << '\n';
    }
    os << "Bounds\n";
    for (const auto& v : vars)
        if (v.kind == VarKind::Continuous) os << ' ' << num(v.lb) << " <= " << v.name << " <= " << num(v.ub) << '\n';
    os << "Binaries\n";
    std::size_t on_line = 0;
    for (const auto& v : vars) {
        if (v.kind != VarKind::Binary) continue;
        os << ' ' << v.name;
        if (++on_line % 8 == 0) os << '\n';
    }
    if (on_line % 8 != 0) os << '\n';
    os << "End\n";
}

void export_lp(const MilpModel& m, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open " + path.string() + " for writing");
    export_lp(m, out);
    if (!out) throw Error("failed writing " + path.string());
}

std::string to_lp_string(const MilpModel& m) {
    std::ostringstream os;
    export_lp(m, os);
    return os.str();
}

ExtractedPlacement extract_placement(const MilpModel& m, const VarValues& values) {
    const auto& vars = m.vars();
    std::vector<double> v(vars.size());
    for (std::size_t i = 0; i < vars.size(); ++i) {
        auto it = values.find(vars[i].name);
        if (it == values.end()) throw Error("solution has no value for " + vars[i].name);
        double x = it->second;
        if (vars[i].kind == VarKind::Binary) {
            const double r = std::round(x);
            if (std::abs(x - r) > kTolerance || r < 0.0 || r > 1.0) throw NonIntegral(vars[i].name, x);
            x = r;
        }
        if (x < vars[i].lb - kTolerance) throw ConstraintViolated("bound:" + vars[i].name, x - vars[i].lb);
        if (x > vars[i].ub + kTolerance) throw ConstraintViolated("bound:" + vars[i].name, vars[i].ub - x);
        v[i] = x;
    }
    for (const auto& r : m.rows()) {
        double act = 0.0;
        for (const auto& t : r.terms) act += t.coef * v[t.var];
        double slack = 0.0;
        switch (r.sense) {
            case Sense::LessEqual: slack = r.rhs - act; break;
            case Sense::GreaterEqual: slack = act - r.rhs; break;
            case Sense::Equal: slack = -std::abs(act - r.rhs); break;
        }
        if (slack < -kTolerance) throw ConstraintViolated(r.name, slack);
    }

    ExtractedPlacement out;
    const auto& aug = m.aug();
    for (const auto& n : aug.op_nodes) {
        std::optional<DeviceId> dev;
        for (auto k : m.devices())
            if (v[m.x(n.id, k)] == 1.0) dev = k;
        if (!dev) throw ConstraintViolated("assign_" + std::to_string(n.id), -1.0);
        out.placement.device_of[n.id] = *dev;
        TaskTiming t;
        t.node = n.id;
        t.start = v[m.start(n.id)];
        t.end = v[m.complete(n.id)];
        t.device = dev;
        out.schedule.tasks.push_back(t);
        out.objective_s = std::max(out.objective_s, t.end);
    }
    for (const auto& f : aug.flow_nodes) {
        TaskTiming t;
        t.node = f.id;
        t.is_flow = true;
        t.start = v[m.start(f.id)];
        t.end = v[m.complete(f.id)];
        for (auto a : m.devices())
            for (auto b : m.devices())
                if (auto idx = m.u(f.id, a, b); idx && v[*idx] == 1.0) t.channel = Channel{a, b};
        out.schedule.tasks.push_back(t);
    }
    std::ranges::sort(out.schedule.tasks, {}, &TaskTiming::node);
    return out;
}

VarValues encode_schedule(const MilpModel& m, const Schedule& s) {
    VarValues out;
    const auto& vars = m.vars();
    auto set = [&](std::size_t idx, double value) { out[vars[idx].name] = value; };
    const auto& aug = m.aug();
    std::map<NodeId, DeviceId> dev;
    for (const auto& n : aug.op_nodes) {
        const auto& t = s.at(n.id);
        dev[n.id] = t.device.value();
        for (auto k : m.devices()) set(m.x(n.id, k), k == *t.device ? 1.0 : 0.0);
        set(m.start(n.id), t.start);
        set(m.complete(n.id), t.end);
    }
    for (const auto& f : aug.flow_nodes) {
        const auto& t = s.at(f.id);
        const auto from = dev.at(f.src);
        const auto to = dev.at(f.dst);
        set(m.z(f.id), from != to ? 1.0 : 0.0);
        for (auto a : m.devices())
            for (auto b : m.devices())
                if (auto idx = m.u(f.id, a, b)) set(*idx, (a == from && b == to && from != to) ? 1.0 : 0.0);
        set(m.start(f.id), t.start);
        set(m.complete(f.id), t.end);
    }
    set(m.objective_var(), s.makespan());
    // Indicator = 1 when the lower id runs first.
    auto ordered = [&](NodeId a, NodeId b) { return s.at(a).end <= s.at(b).start + kTolerance; };
    for (const auto& n : aug.op_nodes)
        for (const auto& o : aug.op_nodes)
            if (n.id < o.id)
                if (auto idx = m.order_op(n.id, o.id)) set(*idx, ordered(n.id, o.id) ? 1.0 : 0.0);
    for (const auto& f : aug.flow_nodes)
        for (const auto& r : aug.flow_nodes)
            if (f.id < r.id)
                if (auto idx = m.order_flow(f.id, r.id)) set(*idx, ordered(f.id, r.id) ? 1.0 : 0.0);
    return out;
}

}  // namespace hetplace
