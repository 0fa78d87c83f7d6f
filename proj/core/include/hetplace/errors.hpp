#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "hetplace/types.hpp"

namespace hetplace {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public Error {
public:
    using Error::Error;
};

class CycleError : public Error {
public:
    explicit CycleError(std::vector<NodeId> cycle);
    const std::vector<NodeId>& cycle() const noexcept { return cycle_; }

private:
    std::vector<NodeId> cycle_;
};

class DanglingEdgeError : public Error {
public:
    DanglingEdgeError(NodeId src, NodeId dst, NodeId missing);
    NodeId missing() const noexcept { return missing_; }

private:
    NodeId missing_;
};

class UnknownEdge : public Error {
public:
    UnknownEdge(NodeId src, NodeId dst);
};

// Fusing pred and succ would close a cycle through an alternate path.
class CycleCreation : public Error {
public:
    CycleCreation(NodeId pred, NodeId succ);
};

class DisconnectedCluster : public Error {
public:
    explicit DisconnectedCluster(std::vector<std::pair<DeviceId, DeviceId>> pairs);
    const std::vector<std::pair<DeviceId, DeviceId>>& unreachable() const noexcept { return pairs_; }

private:
    std::vector<std::pair<DeviceId, DeviceId>> pairs_;
};

class MissingProfile : public Error {
public:
    MissingProfile(NodeId member, DeviceId device);
};

class MissingCost : public Error {
public:
    MissingCost(NodeId op, DeviceId device);
};

class InfeasibleMemory : public Error {
public:
    InfeasibleMemory(Bytes required, Bytes available);
};

class MemoryExceeded : public Error {
public:
    MemoryExceeded(DeviceId device, Bytes overflow);
    DeviceId device() const noexcept { return device_; }
    Bytes overflow() const noexcept { return overflow_; }

private:
    DeviceId device_;
    Bytes overflow_;
};

class NonIntegral : public Error {
public:
    NonIntegral(std::string var, double value);
};

class ConstraintViolated : public Error {
public:
    ConstraintViolated(std::string row, double slack);
    const std::string& row() const noexcept { return row_; }
    double slack() const noexcept { return slack_; }

private:
    std::string row_;
    double slack_;
};

class TooLarge : public Error {
public:
    using Error::Error;
};

class Infeasible : public Error {
public:
    using Error::Error;
};

}  // namespace hetplace
