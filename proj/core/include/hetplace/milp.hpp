#pragma once

// Solver-independent MILP for makespan-minimal placement: variables,
// linear rows, LP-format export, and mapping solutions back to placements.

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "hetplace/graph.hpp"
#include "hetplace/profiles.hpp"
#include "hetplace/schedule.hpp"

namespace hetplace {

enum class VarKind { Binary, Continuous };

struct Variable {
    std::string name;
    VarKind kind = VarKind::Continuous;
    double lb = 0.0;
    double ub = 0.0;
};

enum class Sense { LessEqual, GreaterEqual, Equal };

struct Term {
    std::size_t var = 0;
    double coef = 0.0;
};

// Constraint families, one per modelling concern.
enum class RowFamily {
    Objective,      // T >= C_i
    Precedence,     // C_i <= S_j on augmented links
    Duration,       // operator start/complete
    Assignment,     // one device per operator
    Memory,         // capacity per device
    NonOverlap,     // same-device operators
    FlowIndicator,  // z bounds
    Channel,        // sum u = z
    Activation,     // u >= x + x - 1
    FlowDuration,   // flow start/complete
    FlowOrder,      // C_q >= S_q
    Congestion,     // shared source / destination device
};

std::string_view to_string(RowFamily f);

struct Row {
    std::string name;
    RowFamily family = RowFamily::Objective;
    std::vector<Term> terms;
    Sense sense = Sense::LessEqual;
    double rhs = 0.0;
};

struct BigM {
    double Ms = 0.0;
    double Ml = 0.0;
    double Mr = 0.0;
    double horizon = 0.0;
};

// Horizon = sum of each op's slowest time plus each flow's slowest transfer;
// all three constants equal it. Throws MissingCost.
BigM big_m(const AugGraph& aug, const Cluster& c, const EffectiveMesh& mesh);

class MilpModel {
public:
    const std::vector<Variable>& vars() const noexcept { return vars_; }
    const std::vector<Row>& rows() const noexcept { return rows_; }
    std::size_t objective_var() const noexcept { return objective_; }
    const BigM& big_m() const noexcept { return big_m_; }
    const AugGraph& aug() const noexcept { return aug_; }
    std::span<const DeviceId> devices() const noexcept { return devices_; }

    std::optional<std::size_t> find_var(const std::string& name) const;
    std::size_t count_vars(VarKind kind) const;
    std::size_t count_rows(RowFamily family) const;
    // Variables whose name starts with the given prefix ("x_", "dord_", ...).
    std::size_t count_prefix(std::string_view prefix) const;

    // Variable index lookups by augmented-graph id and device id.
    std::size_t x(NodeId op, DeviceId k) const;
    std::size_t z(NodeId flow) const;
    std::optional<std::size_t> u(NodeId flow, DeviceId from, DeviceId to) const;
    std::size_t start(NodeId node) const;
    std::size_t complete(NodeId node) const;
    std::optional<std::size_t> order_op(NodeId a, NodeId b) const;
    std::optional<std::size_t> order_flow(NodeId a, NodeId b) const;

private:
    friend MilpModel build_model(const CompGraph&, const Cluster&, const EffectiveMesh&);

    std::vector<Variable> vars_;
    std::vector<Row> rows_;
    std::map<std::string, std::size_t, std::less<>> by_name_;
    std::size_t objective_ = 0;
    BigM big_m_;
    AugGraph aug_;
    std::vector<DeviceId> devices_;
    std::map<std::pair<NodeId, DeviceId>, std::size_t> x_;
    std::map<NodeId, std::size_t> z_;
    std::map<std::tuple<NodeId, DeviceId, DeviceId>, std::size_t> u_;
    std::map<NodeId, std::size_t> s_;
    std::map<NodeId, std::size_t> c_;
    std::map<std::pair<NodeId, NodeId>, std::size_t> order_op_;
    std::map<std::pair<NodeId, NodeId>, std::size_t> order_flow_;
};

/// Builds the full model over augment(g). Throws MissingCost, or
/// InfeasibleMemory when the operators cannot fit in the whole cluster.
MilpModel build_model(const CompGraph& g, const Cluster& c, const EffectiveMesh& mesh);

// Binary variable count of build_model without building it:
// aK + b + bK(K-1) + unrelated op pairs + unrelated flow pairs.
std::size_t count_binaries(const CompGraph& g, std::size_t num_devices);

// CPLEX LP text; identical models produce identical bytes.
void export_lp(const MilpModel& m, std::ostream& os);
void export_lp(const MilpModel& m, const std::filesystem::path& path);
std::string to_lp_string(const MilpModel& m);

using VarValues = std::map<std::string, double, std::less<>>;

struct ExtractedPlacement {
    Placement placement;
    Schedule schedule;
    Seconds objective_s = 0.0;
};

/// Validates a full assignment of variable values (integrality, bounds and
/// every row within kTolerance) and reads the placement and schedule from
/// it. Throws NonIntegral, ConstraintViolated.
ExtractedPlacement extract_placement(const MilpModel& m, const VarValues& values);

/// Writes a schedule produced by the scheduler/simulator as model variable
/// values, choosing ordering indicators from the observed order.
VarValues encode_schedule(const MilpModel& m, const Schedule& s);

}  // namespace hetplace
