#include "mlm/cell.hpp"

#include <charconv>
#include <cmath>
#include <map>
#include <optional>

#include <fmt/format.h>

#include "mlm/errors.hpp"

namespace mlm {

namespace {

std::string expand(const std::string& pattern, int index) {
    std::string out;
    out.reserve(pattern.size());
    for (std::size_t pos = 0; pos < pattern.size();) {
        if (pattern.compare(pos, 3, "{i}") == 0) {
            out += std::to_string(index);
            pos += 3;
        } else {
            out += pattern[pos++];
        }
    }
    return out;
}

std::optional<double> parse_literal(const std::string& text) {
    double value = 0.0;
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last) return std::nullopt;
    return value;
}

double resolve_ohms(const CellTopology& topo, const WiringRule& rule, int subcell) {
    const std::string& v = rule.value;
    if (v == "r_write") return topo.r_write;
    if (v == "r_read") return topo.r_read;
    if (v == "r_reset") return topo.r_reset;
    if (v == "r_ground") return topo.r_ground;
    if (v == "r_series") {
        if (subcell < 1) throw InvalidTopology("r_series is per sub-cell; use it in a per-subcell rule");
        return topo.r_series[static_cast<std::size_t>(subcell - 1)];
    }
    if (auto literal = parse_literal(v)) return *literal;
    throw InvalidTopology("wiring references undefined resistance '" + v + "'");
}

WiringRule rule(WiringRule::Kind kind, std::string a, std::string b, std::string value, bool per_subcell) {
    return {kind, std::move(a), std::move(b), std::move(value), per_subcell};
}

}  // namespace

std::vector<WiringRule> default_wiring() {
    using K = WiringRule::Kind;
    // Sub-cell i: write port -> r_write -> device(+); device(-) -> r_series ->
    // membrane node "out"; the read rail feeds every device(+) through r_read
    // and the reset rail every device(-) through r_reset. R0 = r_ground.
    return {
        rule(K::Source, "W{i}", "0", "write{i}", true),
        rule(K::Resistor, "W{i}", "P{i}", "r_write", true),
        rule(K::Memristor, "P{i}", "N{i}", "", true),
        rule(K::Resistor, "N{i}", "out", "r_series", true),
        rule(K::Resistor, "RD", "P{i}", "r_read", true),
        rule(K::Resistor, "RS", "N{i}", "r_reset", true),
        rule(K::Source, "RD", "0", "read", false),
        rule(K::Source, "RS", "0", "reset", false),
        rule(K::Resistor, "out", "0", "r_ground", false),
    };
}

void CellTopology::validate() const {
    if (n_subcells < 1) throw InvalidTopology("n_subcells must be >= 1");
    if (r_series.size() != static_cast<std::size_t>(n_subcells)) {
        throw InvalidTopology(fmt::format("r_series needs {} entries, got {}", n_subcells, r_series.size()));
    }
    auto positive = [](double r) { return r > 0.0 && std::isfinite(r); };
    for (double r : r_series) {
        if (!positive(r)) throw InvalidTopology("r_series entries must be > 0");
    }
    if (!positive(r_write) || !positive(r_read) || !positive(r_reset) || !positive(r_ground)) {
        throw InvalidTopology("cell resistances must be > 0");
    }
    if (wiring.empty()) throw InvalidTopology("wiring is empty");
}

std::vector<SourceDrive> MlmCell::idle_drives() const {
    return std::vector<SourceDrive>(netlist.sources().size());
}

MlmCell build_mlm_cell(const CellTopology& topology) {
    topology.validate();
    const int n = topology.n_subcells;

    MlmCell cell;
    Netlist& net = cell.netlist;
    std::map<std::string, std::size_t> ports;  // port name -> drive slot
    std::vector<int> device_seen(static_cast<std::size_t>(n), 0);
    cell.device_positive.resize(static_cast<std::size_t>(n));
    cell.device_negative.resize(static_cast<std::size_t>(n));

    auto emit = [&](const WiringRule& r, int i) {
        const std::string a = expand(r.node_a, i);
        const std::string b = expand(r.node_b, i);
        if (a.empty() || b.empty()) throw InvalidTopology("wiring rule with an empty node name");
        const NodeId na = net.node(a);
        const NodeId nb = net.node(b);
        const std::string suffix = i > 0 ? std::to_string(i) : std::string{};
        switch (r.kind) {
            case WiringRule::Kind::Resistor: {
                const std::string name = fmt::format("R_{}_{}_{}", a, b, r.value);
                net.add_resistor(name, na, nb, resolve_ohms(topology, r, i));
                break;
            }
            case WiringRule::Kind::Memristor: {
                if (i < 1) throw InvalidTopology("memristor rules must be per-subcell");
                const auto device = static_cast<std::size_t>(i - 1);
                net.add_memristor("M" + suffix, na, nb, device);
                cell.device_positive[device] = na;
                cell.device_negative[device] = nb;
                ++device_seen[device];
                break;
            }
            case WiringRule::Kind::Source: {
                const std::string port = expand(r.value, i);
                if (ports.contains(port)) throw InvalidTopology("port '" + port + "' defined twice");
                net.add_source("V_" + port, na, nb, 0.0, false);
                ports[port] = net.sources().size() - 1;
                break;
            }
            case WiringRule::Kind::Short:
                net.add_short(fmt::format("S_{}_{}", a, b), na, nb);
                break;
        }
    };

    for (const WiringRule& r : topology.wiring) {
        if (r.per_subcell) {
            for (int i = 1; i <= n; ++i) emit(r, i);
        } else {
            emit(r, 0);
        }
    }

    for (int i = 0; i < n; ++i) {
        if (device_seen[static_cast<std::size_t>(i)] != 1) {
            throw InvalidTopology(fmt::format("sub-cell {} must contain exactly one memristor", i + 1));
        }
    }

    auto take_port = [&](const std::string& name) {
        auto it = ports.find(name);
        if (it == ports.end()) throw InvalidTopology("wiring does not define port '" + name + "'");
        const std::size_t slot = it->second;
        ports.erase(it);
        return slot;
    };
    for (int i = 1; i <= n; ++i) cell.write_ports.push_back(take_port("write" + std::to_string(i)));
    cell.reset_port = take_port("reset");
    cell.read_port = take_port("read");
    if (!ports.empty()) {
        throw InvalidTopology("wiring references undefined port '" + ports.begin()->first + "'");
    }

    auto probe = net.find_node(topology.probe_node);
    if (!probe) throw InvalidTopology("probe node '" + topology.probe_node + "' not in wiring");
    cell.probe = *probe;
    return cell;
}

}  // namespace mlm
