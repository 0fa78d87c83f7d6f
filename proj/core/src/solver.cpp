#include "hetplace/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

#include "hetplace/errors.hpp"

namespace hetplace {

std::string_view to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "optimal";
        case SolveStatus::Feasible: return "feasible";
        case SolveStatus::Infeasible: return "infeasible";
        case SolveStatus::Budget: return "budget";
    }
    return "infeasible";
}

namespace {

constexpr std::size_t kNone = static_cast<std::size_t>(-1);

// Tasks 0..n-1 are operators, n..n+m-1 are flows.
struct TaskSet {
    std::size_t n = 0;
    std::size_t m = 0;
    std::size_t K = 0;
    std::vector<bool> active;
    std::vector<Seconds> dur;
    std::vector<NodeId> node;
    std::vector<std::vector<std::size_t>> res;  // exec k | out K+k | in 2K+k
    std::vector<double> rank;                   // longest path from task start to a sink

    std::size_t size() const { return n + m; }
};

TaskSet build_tasks(const Instance& inst, std::span<const std::size_t> a, const std::vector<bool>& op_active) {
    TaskSet ts;
    ts.n = inst.num_ops();
    ts.m = inst.num_flows();
    ts.K = inst.num_devices();
    const auto total = ts.size();
    ts.active.assign(total, false);
    ts.dur.assign(total, 0.0);
    ts.node.assign(total, 0);
    ts.res.assign(total, {});
    ts.rank.assign(total, 0.0);
    for (std::size_t i = 0; i < ts.n; ++i) {
        ts.node[i] = inst.op_id(i);
        if (!op_active[i]) continue;
        ts.active[i] = true;
        ts.dur[i] = inst.op_time(i, a[i]);
        ts.res[i] = {a[i]};
    }
    for (std::size_t q = 0; q < ts.m; ++q) {
        const auto& f = inst.flow(q);
        const auto t = ts.n + q;
        ts.node[t] = f.id;
        if (!op_active[f.src] || !op_active[f.dst]) continue;
        ts.active[t] = true;
        const auto ks = a[f.src];
        const auto kd = a[f.dst];
        if (ks != kd) {
            ts.dur[t] = inst.comm(q, ks, kd);
            ts.res[t] = {ts.K + ks, 2 * ts.K + kd};
        }
    }
    const auto topo = inst.topo();
    for (auto it = topo.rbegin(); it != topo.rend(); ++it) {
        const auto i = *it;
        if (!ts.active[i]) continue;
        double tail = 0.0;
        for (auto q : inst.out_flows(i)) {
            const auto t = ts.n + q;
            if (!ts.active[t]) continue;
            ts.rank[t] = ts.dur[t] + ts.rank[inst.flow(q).dst];
            tail = std::max(tail, ts.rank[t]);
        }
        ts.rank[i] = ts.dur[i] + tail;
    }
    return ts;
}

// Predecessor count and successor lists over active tasks.
void wire(const Instance& inst, const TaskSet& ts, std::vector<std::size_t>& npred,
          std::vector<std::vector<std::size_t>>& succ) {
    npred.assign(ts.size(), 0);
    succ.assign(ts.size(), {});
    for (std::size_t q = 0; q < ts.m; ++q) {
        const auto t = ts.n + q;
        if (!ts.active[t]) continue;
        const auto& f = inst.flow(q);
        succ[f.src].push_back(t);
        ++npred[t];
        succ[t].push_back(f.dst);
        ++npred[f.dst];
    }
}

Schedule to_schedule(const Instance& inst, const TaskSet& ts, std::span<const std::size_t> a,
                     const std::vector<Seconds>& start, const std::vector<Seconds>& end) {
    Schedule s;
    for (std::size_t t = 0; t < ts.size(); ++t) {
        if (!ts.active[t]) continue;
        TaskTiming tt;
        tt.node = ts.node[t];
        tt.start = start[t];
        tt.end = end[t];
        if (t < ts.n) {
            tt.device = inst.device_id(a[t]);
        } else {
            tt.is_flow = true;
            const auto& f = inst.flow(t - ts.n);
            if (a[f.src] != a[f.dst]) tt.channel = Channel{inst.device_id(a[f.src]), inst.device_id(a[f.dst])};
        }
        s.tasks.push_back(tt);
    }
    std::ranges::sort(s.tasks, {}, &TaskTiming::node);
    return s;
}

Schedule list_schedule(const Instance& inst, std::span<const std::size_t> a, const std::vector<bool>& op_active) {
    const TaskSet ts = build_tasks(inst, a, op_active);
    std::vector<std::size_t> npred;
    std::vector<std::vector<std::size_t>> succ;
    wire(inst, ts, npred, succ);

    std::vector<Seconds> start(ts.size(), 0.0);
    std::vector<Seconds> end(ts.size(), 0.0);
    std::vector<bool> busy(3 * ts.K, false);
    std::vector<std::size_t> ready;
    std::vector<std::size_t> running;
    for (std::size_t t = 0; t < ts.size(); ++t)
        if (ts.active[t] && npred[t] == 0) ready.push_back(t);

    auto before = [&](std::size_t x, std::size_t y) {
        if (ts.rank[x] != ts.rank[y]) return ts.rank[x] > ts.rank[y];
        return ts.node[x] < ts.node[y];
    };

    Seconds now = 0.0;
    for (;;) {
        bool zero_started = true;
        while (zero_started) {
            zero_started = false;
            for (std::size_t i = 0; i < running.size();) {
                const auto t = running[i];
                if (end[t] <= now) {
                    for (auto r : ts.res[t]) busy[r] = false;
                    for (auto s : succ[t])
                        if (--npred[s] == 0) ready.push_back(s);
                    running[i] = running.back();
                    running.pop_back();
                } else {
                    ++i;
                }
            }
            std::ranges::sort(ready, before);
            std::vector<std::size_t> waiting;
            for (auto t : ready) {
                const bool free = std::ranges::none_of(ts.res[t], [&](std::size_t r) { return busy[r]; });
                if (!free) {
                    waiting.push_back(t);
                    continue;
                }
                for (auto r : ts.res[t]) busy[r] = true;
                start[t] = now;
                end[t] = now + ts.dur[t];
                running.push_back(t);
                if (ts.dur[t] == 0.0) zero_started = true;
            }
            ready = std::move(waiting);
        }
        if (running.empty()) break;
        now = end[running.front()];
        for (auto t : running) now = std::min(now, end[t]);
    }
    return to_schedule(inst, ts, a, start, end);
}

void check_memory(const Instance& inst, std::span<const std::size_t> a) {
    auto over = inst.memory_overflow(a);
    if (!over.empty()) throw MemoryExceeded(over.front().first, over.front().second);
}

using Clock = std::chrono::steady_clock;

class BranchAndBound {
public:
    BranchAndBound(const Instance& inst, const SolveBudget& budget)
        : inst_(inst), budget_(budget), start_(Clock::now()) {
        assign_.assign(inst.num_ops(), std::nullopt);
        dense_.assign(inst.num_ops(), 0);
        used_.assign(inst.num_devices(), 0);
    }

    Solution run() {
        warm_start();
        descend(0);
        Solution sol;
        sol.stats = stats_;
        if (!best_) {
            if (stopped_) {
                sol.status = SolveStatus::Budget;
                return sol;
            }
            throw Infeasible("no assignment satisfies the memory constraints");
        }
        sol.schedule = left_shift(inst_, *best_schedule_);
        sol.placement = inst_.to_placement(*best_);
        sol.objective_s = sol.schedule.makespan();
        sol.gap = budget_.gap;
        if (stopped_)
            sol.status = SolveStatus::Budget;
        else
            sol.status = budget_.gap > 0.0 ? SolveStatus::Feasible : SolveStatus::Optimal;
        return sol;
    }

private:
    bool out_of_budget() {
        if (stopped_) return true;
        if (budget_.node_limit && stats_.nodes >= *budget_.node_limit) stopped_ = true;
        if (budget_.time_limit_s && (stats_.nodes & 63U) == 0) {
            const std::chrono::duration<double> el = Clock::now() - start_;
            if (el.count() >= *budget_.time_limit_s) stopped_ = true;
        }
        return stopped_;
    }

    // Earliest-finish greedy dive. Its leaf only stands in until the search
    // reaches an equally good one, so ties still go to the first leaf in
    // search order.
    void warm_start() {
        const auto n = inst_.num_ops();
        std::vector<std::size_t> a(n, 0);
        std::vector<bool> active(n, false);
        std::vector<Bytes> used(inst_.num_devices(), 0);
        for (auto op : inst_.topo()) {
            std::optional<std::size_t> pick;
            Seconds pick_end = 0.0;
            active[op] = true;
            for (std::size_t k = 0; k < inst_.num_devices(); ++k) {
                if (used[k] + inst_.op_mem(op) > inst_.device_mem(k)) continue;
                a[op] = k;
                const Seconds end = list_schedule(inst_, a, active).at(inst_.op_id(op)).end;
                if (!pick || end < pick_end) {
                    pick = k;
                    pick_end = end;
                }
            }
            if (!pick) return;
            a[op] = *pick;
            used[*pick] += inst_.op_mem(op);
        }
        Schedule s = list_schedule(inst_, a, active);
        incumbent_ = s.makespan();
        best_ = a;
        best_schedule_ = std::move(s);
        seeded_ = true;
    }

    void descend(std::size_t depth) {
        if (out_of_budget()) return;
        ++stats_.nodes;
        const Seconds bound = partial_lower_bound(inst_, assign_);
        const Seconds cut = incumbent_ * (1.0 - budget_.gap);
        if (std::isinf(bound) || (best_ && (seeded_ ? bound > cut : bound >= cut))) {
            ++stats_.pruned;
            return;
        }
        if (depth == inst_.num_ops()) {
            ++stats_.leaves;
            Schedule s = list_schedule(inst_, dense_, std::vector<bool>(inst_.num_ops(), true));
            const Seconds value = s.makespan();
            if (!best_ || value < incumbent_ || (seeded_ && value == incumbent_)) {
                seeded_ = false;
                incumbent_ = value;
                best_ = dense_;
                best_schedule_ = std::move(s);
            }
            return;
        }
        const auto op = inst_.topo()[depth];
        for (std::size_t k = 0; k < inst_.num_devices(); ++k) {
            if (used_[k] + inst_.op_mem(op) > inst_.device_mem(k)) continue;
            assign_[op] = k;
            dense_[op] = k;
            used_[k] += inst_.op_mem(op);
            descend(depth + 1);
            used_[k] -= inst_.op_mem(op);
            assign_[op] = std::nullopt;
            if (stopped_) return;
        }
    }

    const Instance& inst_;
    SolveBudget budget_;
    Clock::time_point start_;
    std::vector<std::optional<std::size_t>> assign_;
    std::vector<std::size_t> dense_;
    std::vector<Bytes> used_;
    std::optional<std::vector<std::size_t>> best_;
    std::optional<Schedule> best_schedule_;
    Seconds incumbent_ = 0.0;
    SolveStats stats_;
    bool stopped_ = false;
    bool seeded_ = false;
};

}  // namespace

Schedule schedule_for_assignment(const Instance& inst, std::span<const std::size_t> assignment) {
    if (assignment.size() != inst.num_ops()) throw Error("assignment must cover every op");
    check_memory(inst, assignment);
    return list_schedule(inst, assignment, std::vector<bool>(inst.num_ops(), true));
}

Schedule schedule_for_assignment(const Instance& inst, const Placement& placement) {
    return schedule_for_assignment(inst, inst.to_assignment(placement));
}

Schedule schedule_partial(const Instance& inst, std::span<const std::size_t> assignment,
                          const std::vector<bool>& active) {
    return list_schedule(inst, assignment, active);
}

Schedule left_shift(const Instance& inst, const Schedule& s) {
    const auto a = [&] {
        std::vector<std::size_t> out(inst.num_ops(), 0);
        for (std::size_t i = 0; i < inst.num_ops(); ++i) {
            const auto& t = s.at(inst.op_id(i));
            out[i] = inst.device_index(*t.device);
        }
        return out;
    }();
    const TaskSet ts = build_tasks(inst, a, std::vector<bool>(inst.num_ops(), true));
    std::vector<std::size_t> npred;
    std::vector<std::vector<std::size_t>> succ;
    wire(inst, ts, npred, succ);

    std::vector<Seconds> start(ts.size());
    std::vector<Seconds> end(ts.size());
    for (std::size_t t = 0; t < ts.size(); ++t) {
        const auto& tt = s.at(ts.node[t]);
        start[t] = tt.start;
        end[t] = tt.end;
    }
    std::vector<std::vector<std::size_t>> preds(ts.size());
    for (std::size_t t = 0; t < ts.size(); ++t)
        for (auto x : succ[t]) preds[x].push_back(t);

    // Resource predecessor: previous holder in start order.
    std::vector<std::vector<std::size_t>> prev_on_res(ts.size());
    std::vector<std::vector<std::size_t>> holders(3 * ts.K);
    for (std::size_t t = 0; t < ts.size(); ++t)
        for (auto r : ts.res[t]) holders[r].push_back(t);
    for (auto& h : holders) {
        std::ranges::sort(h, [&](std::size_t x, std::size_t y) {
            if (start[x] != start[y]) return start[x] < start[y];
            if (end[x] != end[y]) return end[x] < end[y];
            return ts.node[x] < ts.node[y];
        });
        for (std::size_t i = 1; i < h.size(); ++i) prev_on_res[h[i]].push_back(h[i - 1]);
    }

    std::vector<Seconds> ns(ts.size(), 0.0);
    std::vector<Seconds> ne(ts.size(), 0.0);
    for (std::size_t t = 0; t < ts.size(); ++t) ne[t] = ts.dur[t];
    for (std::size_t iter = 0; iter <= ts.size(); ++iter) {
        bool changed = false;
        for (std::size_t t = 0; t < ts.size(); ++t) {
            Seconds earliest = 0.0;
            for (auto p : preds[t]) earliest = std::max(earliest, ne[p]);
            for (auto p : prev_on_res[t]) earliest = std::max(earliest, ne[p]);
            if (earliest != ns[t]) {
                ns[t] = earliest;
                ne[t] = earliest + ts.dur[t];
                changed = true;
            }
        }
        if (!changed) break;
    }
    // Never move a task later than it was.
    for (std::size_t t = 0; t < ts.size(); ++t) {
        if (ns[t] > start[t]) {
            ns[t] = start[t];
            ne[t] = end[t];
        }
    }
    return to_schedule(inst, ts, a, ns, ne);
}

Seconds partial_lower_bound(const Instance& inst, std::span<const std::optional<std::size_t>> assignment) {
    const auto K = inst.num_devices();
    std::vector<Bytes> used(K, 0);
    std::vector<Seconds> load(K, 0.0);
    for (std::size_t i = 0; i < inst.num_ops(); ++i) {
        if (!assignment[i]) continue;
        used[*assignment[i]] += inst.op_mem(i);
        load[*assignment[i]] += inst.op_time(i, *assignment[i]);
    }
    std::vector<Seconds> dur(inst.num_ops(), 0.0);
    for (std::size_t i = 0; i < inst.num_ops(); ++i) {
        if (assignment[i]) {
            dur[i] = inst.op_time(i, *assignment[i]);
            continue;
        }
        Seconds lo = std::numeric_limits<Seconds>::infinity();
        for (std::size_t k = 0; k < K; ++k)
            if (used[k] + inst.op_mem(i) <= inst.device_mem(k)) lo = std::min(lo, inst.op_time(i, k));
        if (std::isinf(lo)) return lo;
        dur[i] = lo;
    }
    std::vector<Seconds> finish(inst.num_ops(), 0.0);
    Seconds cp = 0.0;
    for (auto i : inst.topo()) {
        Seconds ready = 0.0;
        for (auto q : inst.in_flows(i)) {
            const auto& f = inst.flow(q);
            Seconds arrive = finish[f.src];
            if (assignment[f.src] && assignment[i] && *assignment[f.src] != *assignment[i])
                arrive = arrive + inst.comm(q, *assignment[f.src], *assignment[i]);
            ready = std::max(ready, arrive);
        }
        finish[i] = ready + dur[i];
        cp = std::max(cp, finish[i]);
    }
    // Device loads are summed in a different order than the scheduler adds
    // them, so shave a relative ulp-scale margin to stay a valid bound.
    Seconds busiest = 0.0;
    for (auto l : load) busiest = std::max(busiest, l * (1.0 - 1e-12));
    return std::max(cp, busiest);
}

Solution solve_exact(const Instance& inst, const SolveBudget& budget) {
    if (!(budget.gap >= 0.0 && budget.gap < 1.0)) throw Error("gap must lie in [0,1)");
    if (inst.num_ops() == 0) throw Error("graph has no operators");
    return BranchAndBound(inst, budget).run();
}

Solution brute_force(const Instance& inst) {
    const auto n = inst.num_ops();
    const auto K = inst.num_devices();
    if (n == 0) throw Error("graph has no operators");
    if (std::pow(static_cast<double>(K), static_cast<double>(n)) > kBruteForceLimit)
        throw TooLarge("brute force limited to 2^24 assignments");

    const auto topo = inst.topo();
    std::vector<std::size_t> digits(n, 0);  // digit d is the device of topo[d]
    std::vector<std::size_t> a(n, 0);
    Solution sol;
    std::optional<std::vector<std::size_t>> best;
    for (;;) {
        for (std::size_t d = 0; d < n; ++d) a[topo[d]] = digits[d];
        if (inst.memory_overflow(a).empty()) {
            ++sol.stats.leaves;
            Schedule s = list_schedule(inst, a, std::vector<bool>(n, true));
            if (!best || s.makespan() < sol.objective_s) {
                sol.objective_s = s.makespan();
                sol.schedule = std::move(s);
                best = a;
            }
        }
        ++sol.stats.nodes;
        std::size_t d = n;
        while (d > 0) {
            --d;
            if (++digits[d] < K) break;
            digits[d] = 0;
            if (d == 0) {
                d = n + 1;
                break;
            }
        }
        if (d == n + 1) break;
    }
    if (!best) throw Infeasible("no assignment satisfies the memory constraints");
    sol.schedule = left_shift(inst, sol.schedule);
    sol.objective_s = sol.schedule.makespan();
    sol.placement = inst.to_placement(*best);
    sol.status = SolveStatus::Optimal;
    return sol;
}

}  // namespace hetplace
