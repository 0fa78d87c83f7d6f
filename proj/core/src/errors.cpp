#include "hetplace/errors.hpp"

#include <sstream>

namespace hetplace {

namespace {

std::string join_ids(const std::vector<NodeId>& ids) {
    std::ostringstream os;
    for (std::size_t i = 0; i < ids.size(); ++i) {
        if (i) os << " -> ";
        os << ids[i];
    }
    return os.str();
}

std::string pair_list(const std::vector<std::pair<DeviceId, DeviceId>>& pairs) {
    std::ostringstream os;
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        if (i) os << ", ";
        os << '(' << pairs[i].first << ',' << pairs[i].second << ')';
    }
    return os.str();
}

}  // namespace

CycleError::CycleError(std::vector<NodeId> cycle)
    : Error("graph contains a cycle: " + join_ids(cycle)), cycle_(std::move(cycle)) {}

DanglingEdgeError::DanglingEdgeError(NodeId src, NodeId dst, NodeId missing)
    : Error("edge (" + std::to_string(src) + "," + std::to_string(dst) + ") references unknown node " +
            std::to_string(missing)),
      missing_(missing) {}

UnknownEdge::UnknownEdge(NodeId src, NodeId dst)
    : Error("no edge (" + std::to_string(src) + "," + std::to_string(dst) + ")") {}

CycleCreation::CycleCreation(NodeId pred, NodeId succ)
    : Error("fusing " + std::to_string(pred) + " and " + std::to_string(succ) +
            " would create a cycle (alternate path exists)") {}

DisconnectedCluster::DisconnectedCluster(std::vector<std::pair<DeviceId, DeviceId>> pairs)
    : Error("cluster is disconnected; unreachable pairs: " + pair_list(pairs)), pairs_(std::move(pairs)) {}

MissingProfile::MissingProfile(NodeId member, DeviceId device)
    : Error("no profiled time for op " + std::to_string(member) + " on device " + std::to_string(device)) {}

MissingCost::MissingCost(NodeId op, DeviceId device)
    : Error("op " + std::to_string(op) + " has no compute time for device " + std::to_string(device)) {}

InfeasibleMemory::InfeasibleMemory(Bytes required, Bytes available)
    : Error("total operator memory " + std::to_string(required) + " exceeds cluster memory " +
            std::to_string(available)) {}

MemoryExceeded::MemoryExceeded(DeviceId device, Bytes overflow)
    : Error("device " + std::to_string(device) + " memory exceeded by " + std::to_string(overflow) + " bytes"),
      device_(device),
      overflow_(overflow) {}

NonIntegral::NonIntegral(std::string var, double value)
    : Error("binary variable " + var + " has non-integral value " + std::to_string(value)) {}

ConstraintViolated::ConstraintViolated(std::string row, double slack)
    : Error("constraint " + row + " violated (slack " + std::to_string(slack) + ")"),
      row_(std::move(row)),
      slack_(slack) {}

}  // namespace hetplace
