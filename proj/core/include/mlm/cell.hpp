#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "mlm/network.hpp"

namespace mlm {

/// One line of the declarative cell wiring. Node names and source port
/// names may contain "{i}", which expands to the 1-based sub-cell index for
/// per-sub-cell rules. A resistor's `value` is either a literal in ohms or
/// one of r_write, r_series, r_read, r_reset, r_ground.
struct WiringRule {
    enum class Kind { Resistor, Memristor, Source, Short };

    Kind kind = Kind::Resistor;
    std::string node_a;
    std::string node_b;
    std::string value;
    bool per_subcell = false;
};

std::vector<WiringRule> default_wiring();

struct CellTopology {
    int n_subcells = 3;
    std::vector<double> r_series{500.0, 500.0, 500.0};  ///< one per sub-cell
    double r_write = 1500.0;
    double r_read = 50.0e3;
    double r_reset = 500.0;
    double r_ground = 21985.7;
    std::string probe_node = "out";
    std::vector<WiringRule> wiring = default_wiring();

    /// Throws InvalidTopology.
    void validate() const;
};

/// A built cell: the netlist plus handles to its ports.
struct MlmCell {
    Netlist netlist;
    std::vector<std::size_t> write_ports;  ///< drive slots, one per sub-cell
    std::size_t reset_port = 0;            ///< drive slot
    std::size_t read_port = 0;             ///< drive slot
    NodeId probe;
    std::vector<NodeId> device_positive;   ///< per device
    std::vector<NodeId> device_negative;   ///< per device

    std::size_t subcells() const { return write_ports.size(); }

    /// All sources open.
    std::vector<SourceDrive> idle_drives() const;
};

MlmCell build_mlm_cell(const CellTopology& topology);

}  // namespace mlm
