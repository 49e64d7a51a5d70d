#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace mlm {

struct NodeId {
    std::uint32_t value = 0;

    friend bool operator==(NodeId, NodeId) = default;
};

inline constexpr NodeId kGround{0};

struct Resistor {
    double ohms;
};

struct MemristorRef {
    std::size_t device;
};

struct VoltageSource {
    double volts = 0.0;
    bool enabled = true;
};

struct Short {};

using ElementKind = std::variant<Resistor, MemristorRef, VoltageSource, Short>;

/// Two-terminal element. Currents are reported flowing from node_a to
/// node_b through the element; for a source node_a is the + terminal, and
/// for a memristor node_a is the programming (positive) terminal.
struct Element {
    std::string name;
    ElementKind kind;
    NodeId node_a;
    NodeId node_b;
};

/// Drive applied to one voltage source for a solve. Disabled means open.
struct SourceDrive {
    bool enabled = false;
    double volts = 0.0;
};

class Netlist {
public:
    Netlist();

    NodeId add_node(std::string name);
    /// Returns the node with this name, creating it on first use.
    NodeId node(std::string_view name);
    std::optional<NodeId> find_node(std::string_view name) const;
    const std::string& node_name(NodeId id) const;

    std::size_t add_resistor(std::string name, NodeId a, NodeId b, double ohms);
    std::size_t add_memristor(std::string name, NodeId positive, NodeId negative, std::size_t device);
    std::size_t add_source(std::string name, NodeId positive, NodeId negative, double volts,
                           bool enabled = true);
    std::size_t add_short(std::string name, NodeId a, NodeId b);

    std::size_t node_count() const { return node_names_.size(); }
    std::span<const Element> elements() const { return elements_; }
    std::size_t device_count() const { return device_count_; }

    /// Element indices of the voltage sources, in insertion order. A source's
    /// position in this list is its drive slot.
    std::span<const std::size_t> sources() const { return sources_; }
    std::optional<std::size_t> find_element(std::string_view name) const;

    /// Drives taken from each source element's own volts/enabled fields.
    std::vector<SourceDrive> default_drives() const;

    /// Human-readable element list, one element per line.
    std::string describe() const;

private:
    std::size_t push(Element element);

    std::vector<std::string> node_names_;
    std::vector<Element> elements_;
    std::vector<std::size_t> sources_;
    std::size_t device_count_ = 0;
};

struct SolveResult {
    std::vector<double> node_voltages;     ///< indexed by node id, ground = 0
    std::vector<double> element_currents;  ///< indexed by element; 0 for open sources
    double total_source_power = 0.0;       ///< watts delivered by sources
    double dissipated_power = 0.0;         ///< watts absorbed by passive elements

    double voltage(NodeId id) const { return node_voltages[id.value]; }
};

/// Nodal analysis with source branch currents (MNA), dense LU with partial
/// pivoting. Throws SingularNetwork for floating subgraphs and
/// zero-resistance source loops.
SolveResult solve_dc(const Netlist& netlist, std::span<const double> device_resistances);
SolveResult solve_dc(const Netlist& netlist, std::span<const double> device_resistances,
                     std::span<const SourceDrive> drives);

/// Power absorbed by passive elements. Equals the delivered source power up
/// to round-off.
double network_power(const SolveResult& result);

/// Largest absolute KCL residual over non-ground nodes, amperes.
double kcl_residual(const Netlist& netlist, const SolveResult& result);

/// Reusable solver for repeated solves of one netlist under one drive
/// configuration, where only the memristor resistances change. Connectivity
/// is checked once at construction and the static stamps are cached.
class DcSystem {
public:
    DcSystem(const Netlist& netlist, std::span<const SourceDrive> drives);

    /// Solves for node voltages only (no currents); index by node id.
    const Eigen::VectorXd& solve_voltages(std::span<const double> device_resistances);

    /// Full result, identical to solve_dc for the same inputs.
    SolveResult solve(std::span<const double> device_resistances);

private:
    const Netlist* netlist_;
    std::vector<SourceDrive> drives_;
    std::vector<int> branch_of_element_;
    Eigen::Index unknowns_ = 0;
    Eigen::MatrixXd static_matrix_;
    Eigen::VectorXd rhs_;
    Eigen::MatrixXd matrix_;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu_;
    Eigen::VectorXd node_voltages_;
    Eigen::VectorXd last_solution_;
};

}  // namespace mlm
