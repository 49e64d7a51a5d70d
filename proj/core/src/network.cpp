#include "mlm/network.hpp"

#include <cmath>
#include <numeric>
#include <sstream>

#include <fmt/format.h>

#include "mlm/errors.hpp"

namespace mlm {

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

class DisjointSets {
public:
    explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }

    std::size_t find(std::size_t x) {
        while (parent_[x] != x) {
            parent_[x] = parent_[parent_[x]];
            x = parent_[x];
        }
        return x;
    }

    /// Returns false when a and b were already joined.
    bool unite(std::size_t a, std::size_t b) {
        a = find(a);
        b = find(b);
        if (a == b) return false;
        parent_[b] = a;
        return true;
    }

private:
    std::vector<std::size_t> parent_;
};

// Returns, for every element, its slot in `drives` (sources) or -1.
std::vector<int> source_slots(const Netlist& netlist) {
    std::vector<int> slot(netlist.elements().size(), -1);
    const auto sources = netlist.sources();
    for (std::size_t s = 0; s < sources.size(); ++s) slot[sources[s]] = static_cast<int>(s);
    return slot;
}

void check_topology(const Netlist& netlist, std::span<const SourceDrive> drives,
                    std::span<const int> slot) {
    const auto elements = netlist.elements();
    DisjointSets connected(netlist.node_count());
    DisjointSets stiff(netlist.node_count());
    for (std::size_t i = 0; i < elements.size(); ++i) {
        const Element& e = elements[i];
        bool conducts = true;
        bool is_stiff = std::holds_alternative<Short>(e.kind);
        if (std::holds_alternative<VoltageSource>(e.kind)) {
            conducts = drives[static_cast<std::size_t>(slot[i])].enabled;
            is_stiff = conducts;
        }
        if (!conducts) continue;
        connected.unite(e.node_a.value, e.node_b.value);
        if (is_stiff && !stiff.unite(e.node_a.value, e.node_b.value)) {
            throw SingularNetwork("zero-resistance loop closed by element '" + e.name + "'");
        }
    }
    const std::size_t ground = connected.find(kGround.value);
    for (std::uint32_t n = 1; n < netlist.node_count(); ++n) {
        if (connected.find(n) != ground) {
            throw SingularNetwork("node '" + netlist.node_name(NodeId{n}) +
                                  "' has no conductive path to ground");
        }
    }
}

double element_resistance(const Element& e, std::span<const double> device_resistances) {
    if (const auto* r = std::get_if<Resistor>(&e.kind)) return r->ohms;
    const auto& m = std::get<MemristorRef>(e.kind);
    const double r = device_resistances[m.device];
    if (!(r > 0.0) || !std::isfinite(r)) {
        throw SingularNetwork(fmt::format("device {} has non-physical resistance {}", m.device, r));
    }
    return r;
}

}  // namespace

Netlist::Netlist() { node_names_.emplace_back("0"); }

NodeId Netlist::add_node(std::string name) {
    if (find_node(name)) throw InvalidTopology("duplicate node '" + name + "'");
    node_names_.push_back(std::move(name));
    return NodeId{static_cast<std::uint32_t>(node_names_.size() - 1)};
}

NodeId Netlist::node(std::string_view name) {
    if (auto id = find_node(name)) return *id;
    return add_node(std::string(name));
}

std::optional<NodeId> Netlist::find_node(std::string_view name) const {
    if (name == "0" || name == "gnd") return kGround;
    for (std::size_t i = 0; i < node_names_.size(); ++i) {
        if (node_names_[i] == name) return NodeId{static_cast<std::uint32_t>(i)};
    }
    return std::nullopt;
}

const std::string& Netlist::node_name(NodeId id) const { return node_names_.at(id.value); }

std::size_t Netlist::push(Element element) {
    if (element.node_a.value >= node_count() || element.node_b.value >= node_count()) {
        throw InvalidTopology("element '" + element.name + "' references an undefined node");
    }
    if (find_element(element.name)) throw InvalidTopology("duplicate element '" + element.name + "'");
    elements_.push_back(std::move(element));
    return elements_.size() - 1;
}

std::size_t Netlist::add_resistor(std::string name, NodeId a, NodeId b, double ohms) {
    if (!(ohms > 0.0) || !std::isfinite(ohms)) {
        throw InvalidTopology(fmt::format("resistor '{}' must have finite ohms > 0 (got {})", name, ohms));
    }
    return push({std::move(name), Resistor{ohms}, a, b});
}

std::size_t Netlist::add_memristor(std::string name, NodeId positive, NodeId negative,
                                   std::size_t device) {
    const std::size_t index = push({std::move(name), MemristorRef{device}, positive, negative});
    device_count_ = std::max(device_count_, device + 1);
    return index;
}

std::size_t Netlist::add_source(std::string name, NodeId positive, NodeId negative, double volts,
                                bool enabled) {
    const std::size_t index = push({std::move(name), VoltageSource{volts, enabled}, positive, negative});
    sources_.push_back(index);
    return index;
}

std::size_t Netlist::add_short(std::string name, NodeId a, NodeId b) {
    return push({std::move(name), Short{}, a, b});
}

std::optional<std::size_t> Netlist::find_element(std::string_view name) const {
    for (std::size_t i = 0; i < elements_.size(); ++i) {
        if (elements_[i].name == name) return i;
    }
    return std::nullopt;
}

std::vector<SourceDrive> Netlist::default_drives() const {
    std::vector<SourceDrive> drives;
    drives.reserve(sources_.size());
    for (std::size_t index : sources_) {
        const auto& src = std::get<VoltageSource>(elements_[index].kind);
        drives.push_back({src.enabled, src.volts});
    }
    return drives;
}

std::string Netlist::describe() const {
    std::ostringstream out;
    for (const Element& e : elements_) {
        out << e.name << ' ' << node_names_[e.node_a.value] << ' ' << node_names_[e.node_b.value] << ' ';
        std::visit(overloaded{
                       [&](const Resistor& r) { out << "R " << fmt::format("{:g}", r.ohms); },
                       [&](const MemristorRef& m) { out << "M device=" << m.device; },
                       [&](const VoltageSource& v) {
                           out << "V " << fmt::format("{:g}", v.volts) << (v.enabled ? "" : " off");
                       },
                       [&](const Short&) { out << "SHORT"; },
                   },
                   e.kind);
        out << '\n';
    }
    return out.str();
}

DcSystem::DcSystem(const Netlist& netlist, std::span<const SourceDrive> drives)
    : netlist_(&netlist), drives_(drives.begin(), drives.end()) {
    if (drives_.size() != netlist.sources().size()) {
        throw InvalidTopology(fmt::format("expected {} source drives, got {}", netlist.sources().size(),
                                          drives_.size()));
    }
    const std::vector<int> slot = source_slots(netlist);
    check_topology(netlist, drives_, slot);

    const auto elements = netlist.elements();
    const auto nodes = static_cast<Eigen::Index>(netlist.node_count() - 1);
    branch_of_element_.assign(elements.size(), -1);
    Eigen::Index next_branch = nodes;
    for (std::size_t i = 0; i < elements.size(); ++i) {
        const Element& e = elements[i];
        const bool branch = std::holds_alternative<Short>(e.kind) ||
                            (slot[i] >= 0 && drives_[static_cast<std::size_t>(slot[i])].enabled);
        if (branch) branch_of_element_[i] = static_cast<int>(next_branch++);
    }
    unknowns_ = next_branch;

    static_matrix_ = Eigen::MatrixXd::Zero(unknowns_, unknowns_);
    rhs_ = Eigen::VectorXd::Zero(unknowns_);
    auto row = [](NodeId n) { return static_cast<Eigen::Index>(n.value) - 1; };
    for (std::size_t i = 0; i < elements.size(); ++i) {
        const Element& e = elements[i];
        const Eigen::Index a = row(e.node_a);
        const Eigen::Index b = row(e.node_b);
        if (const auto* r = std::get_if<Resistor>(&e.kind)) {
            const double g = 1.0 / r->ohms;
            if (a >= 0) static_matrix_(a, a) += g;
            if (b >= 0) static_matrix_(b, b) += g;
            if (a >= 0 && b >= 0) {
                static_matrix_(a, b) -= g;
                static_matrix_(b, a) -= g;
            }
        } else if (branch_of_element_[i] >= 0) {
            const Eigen::Index k = branch_of_element_[i];
            if (a >= 0) {
                static_matrix_(a, k) += 1.0;
                static_matrix_(k, a) += 1.0;
            }
            if (b >= 0) {
                static_matrix_(b, k) -= 1.0;
                static_matrix_(k, b) -= 1.0;
            }
            if (slot[i] >= 0) rhs_(k) = drives_[static_cast<std::size_t>(slot[i])].volts;
        }
    }
    matrix_.resize(unknowns_, unknowns_);
    node_voltages_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(netlist.node_count()));
}

const Eigen::VectorXd& DcSystem::solve_voltages(std::span<const double> device_resistances) {
    if (device_resistances.size() < netlist_->device_count()) {
        throw InvalidTopology(fmt::format("expected {} device resistances, got {}",
                                          netlist_->device_count(), device_resistances.size()));
    }
    matrix_ = static_matrix_;
    for (const Element& e : netlist_->elements()) {
        if (!std::holds_alternative<MemristorRef>(e.kind)) continue;
        const double g = 1.0 / element_resistance(e, device_resistances);
        const Eigen::Index a = static_cast<Eigen::Index>(e.node_a.value) - 1;
        const Eigen::Index b = static_cast<Eigen::Index>(e.node_b.value) - 1;
        if (a >= 0) matrix_(a, a) += g;
        if (b >= 0) matrix_(b, b) += g;
        if (a >= 0 && b >= 0) {
            matrix_(a, b) -= g;
            matrix_(b, a) -= g;
        }
    }
    if (unknowns_ == 0) {
        node_voltages_.setZero();
        return node_voltages_;
    }
    lu_.compute(matrix_);
    const Eigen::VectorXd x = lu_.solve(rhs_);
    if (!x.allFinite() || lu_.rcond() < 1e-15) {
        throw SingularNetwork("nodal matrix is numerically singular");
    }
    node_voltages_(0) = 0.0;
    node_voltages_.tail(node_voltages_.size() - 1) = x.head(node_voltages_.size() - 1);
    last_solution_ = x;
    return node_voltages_;
}

SolveResult DcSystem::solve(std::span<const double> device_resistances) {
    solve_voltages(device_resistances);
    const auto elements = netlist_->elements();
    SolveResult result;
    result.node_voltages.assign(node_voltages_.begin(), node_voltages_.end());
    result.element_currents.assign(elements.size(), 0.0);
    for (std::size_t i = 0; i < elements.size(); ++i) {
        const Element& e = elements[i];
        const double va = result.node_voltages[e.node_a.value];
        const double vb = result.node_voltages[e.node_b.value];
        const double dv = va - vb;
        if (branch_of_element_[i] >= 0) {
            const double current = last_solution_(branch_of_element_[i]);
            result.element_currents[i] = current;
            result.total_source_power -= dv * current;
        } else if (std::holds_alternative<Resistor>(e.kind) || std::holds_alternative<MemristorRef>(e.kind)) {
            const double current = dv / element_resistance(e, device_resistances);
            result.element_currents[i] = current;
            result.dissipated_power += dv * current;
        }
    }
    return result;
}

SolveResult solve_dc(const Netlist& netlist, std::span<const double> device_resistances) {
    const auto drives = netlist.default_drives();
    return solve_dc(netlist, device_resistances, drives);
}

SolveResult solve_dc(const Netlist& netlist, std::span<const double> device_resistances,
                     std::span<const SourceDrive> drives) {
    DcSystem system(netlist, drives);
    return system.solve(device_resistances);
}

double network_power(const SolveResult& result) { return result.dissipated_power; }

double kcl_residual(const Netlist& netlist, const SolveResult& result) {
    std::vector<double> net(netlist.node_count(), 0.0);
    const auto elements = netlist.elements();
    for (std::size_t i = 0; i < elements.size(); ++i) {
        net[elements[i].node_a.value] += result.element_currents[i];
        net[elements[i].node_b.value] -= result.element_currents[i];
    }
    double worst = 0.0;
    for (std::size_t n = 1; n < net.size(); ++n) worst = std::max(worst, std::abs(net[n]));
    return worst;
}

}  // namespace mlm
