#include "hetplace/baselines.hpp"

#include <limits>
#include <tuple>

#include "hetplace/errors.hpp"

namespace hetplace {

std::string_view to_string(BaselineKind k) {
    switch (k) {
        case BaselineKind::EarliestFinish: return "etf";
        case BaselineKind::EarliestStart: return "sct";
    }
    return "etf";
}

Solution greedy_place(const Instance& inst, BaselineKind kind) {
    const auto n = inst.num_ops();
    const auto K = inst.num_devices();
    std::vector<std::size_t> assign(n, 0);
    std::vector<bool> active(n, false);
    std::vector<Bytes> used(K, 0);

    for (auto op : inst.topo()) {
        const NodeId id = inst.op_id(op);
        std::size_t best = K;
        std::tuple<Seconds, Seconds> best_key{std::numeric_limits<Seconds>::infinity(), 0.0};
        active[op] = true;
        for (std::size_t k = 0; k < K; ++k) {
            if (used[k] + inst.op_mem(op) > inst.device_mem(k)) continue;
            assign[op] = k;
            const auto s = schedule_partial(inst, assign, active);
            const auto& t = s.at(id);
            const auto key = kind == BaselineKind::EarliestFinish ? std::tuple{t.end, t.start}
                                                                  : std::tuple{t.start, t.end};
            if (key < best_key) {
                best_key = key;
                best = k;
            }
        }
        if (best == K) throw Infeasible("op " + std::to_string(id) + " fits on no device");
        assign[op] = best;
        used[best] += inst.op_mem(op);
    }

    Solution sol;
    sol.placement = inst.to_placement(assign);
    sol.schedule = schedule_for_assignment(inst, assign);
    sol.objective_s = sol.schedule.makespan();
    sol.status = SolveStatus::Feasible;
    return sol;
}

}  // namespace hetplace
