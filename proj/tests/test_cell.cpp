#include <algorithm>
#include <cmath>
#include <vector>

#include <doctest.h>

#include "mlm/cell.hpp"
#include "mlm/controller.hpp"
#include "mlm/errors.hpp"

using namespace mlm;

namespace {

std::size_t count_kind(const Netlist& net, std::size_t index) {
    return static_cast<std::size_t>(std::count_if(net.elements().begin(), net.elements().end(),
                                                  [&](const Element& e) { return e.kind.index() == index; }));
}

// Distinct values up to a relative tolerance.
std::size_t distinct(std::vector<double> v, double rel) {
    std::sort(v.begin(), v.end());
    std::size_t n = v.empty() ? 0 : 1;
    for (std::size_t i = 1; i < v.size(); ++i) {
        if (v[i] - v[i - 1] > rel * std::abs(v[i])) ++n;
    }
    return n;
}

std::vector<TernaryCode> all_codes() {
    std::vector<TernaryCode> codes;
    for (int a = 0; a < 3; ++a)
        for (int b = 0; b < 3; ++b)
            for (int c = 0; c < 3; ++c) codes.push_back({a, b, c});
    return codes;
}

}  // namespace

TEST_CASE("default three sub-cell cell") {
    const MlmCell cell = build_mlm_cell(CellTopology{});
    const Netlist& net = cell.netlist;
    CHECK(cell.subcells() == 3);
    CHECK(net.device_count() == 3);
    CHECK(count_kind(net, 1) == 3);          // memristors
    CHECK(count_kind(net, 2) == 5);          // 3 write + read + reset
    CHECK(count_kind(net, 0) == 3 * 4 + 1);  // write, series, read, reset per sub-cell + ground leg
    CHECK(net.sources().size() == 5);
    CHECK(net.node_name(cell.probe) == "out");
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(net.node_name(cell.device_positive[i]) == "P" + std::to_string(i + 1));
        CHECK(net.node_name(cell.device_negative[i]) == "N" + std::to_string(i + 1));
    }
    for (const SourceDrive& d : cell.idle_drives()) CHECK_FALSE(d.enabled);
}

TEST_CASE("single sub-cell read is a plain divider") {
    CellTopology topo;
    topo.n_subcells = 1;
    topo.r_series = {700.0};
    const MlmCell cell = build_mlm_cell(topo);
    auto drives = cell.idle_drives();
    drives[cell.read_port] = {true, 0.05};
    for (double r : {1e3, 2e5, 6e6}) {
        const auto res = solve_dc(cell.netlist, std::vector<double>{r}, drives);
        const double want = 0.05 * topo.r_ground / (topo.r_read + r + 700.0 + topo.r_ground);
        CHECK(std::abs(res.voltage(cell.probe) - want) <= 1e-12 * want);
    }
}

TEST_CASE("topology errors") {
    CellTopology topo;
    SUBCASE("series list length") {
        topo.r_series = {500.0};
        CHECK_THROWS_AS(build_mlm_cell(topo), InvalidTopology);
    }
    SUBCASE("non-positive resistor") {
        topo.r_ground = 0.0;
        CHECK_THROWS_AS(build_mlm_cell(topo), InvalidTopology);
    }
    SUBCASE("missing port") {
        topo.wiring.erase(topo.wiring.begin() + 6);  // read source
        CHECK_THROWS_AS(build_mlm_cell(topo), InvalidTopology);
    }
    SUBCASE("undefined resistance name") {
        topo.wiring[1].value = "r_bogus";
        CHECK_THROWS_AS(build_mlm_cell(topo), InvalidTopology);
    }
    SUBCASE("unknown probe") {
        topo.probe_node = "nowhere";
        CHECK_THROWS_AS(build_mlm_cell(topo), InvalidTopology);
    }
    SUBCASE("no sub-cells") {
        topo.n_subcells = 0;
        topo.r_series.clear();
        CHECK_THROWS_AS(build_mlm_cell(topo), InvalidTopology);
    }
}

TEST_CASE("literal resistor values in wiring") {
    CellTopology topo;
    topo.wiring.back().value = "21985.7";
    const MlmCell a = build_mlm_cell(topo);
    const MlmCell b = build_mlm_cell(CellTopology{});
    const std::vector<double> r{2e5, 3e5, 4e5};
    auto drives = a.idle_drives();
    drives[a.read_port] = {true, 0.05};
    CHECK(solve_dc(a.netlist, r, drives).voltage(a.probe) == doctest::Approx(solve_dc(b.netlist, r, drives).voltage(b.probe)));
}

TEST_CASE("equal series resistors collapse 27 codes onto 10 levels") {
    SimSetup setup;
    const MlmCell cell = build_mlm_cell(setup.topology);
    std::vector<double> levels;
    for (const auto& code : all_codes()) levels.push_back(simulate_code(setup, cell, code).v_out);
    CHECK(distinct(levels, 1e-9) == 10);

    // A permutation of the same trits reads the same level.
    const double a = simulate_code(setup, cell, TernaryCode{0, 1, 2}).v_out;
    const double b = simulate_code(setup, cell, TernaryCode{2, 0, 1}).v_out;
    CHECK(std::abs(a - b) <= 1e-9 * a);
}

TEST_CASE("unequal series resistors separate permutations") {
    SimSetup setup;
    setup.topology.r_series = {200.0, 2000.0, 20000.0};
    const MlmCell cell = build_mlm_cell(setup.topology);
    std::vector<double> levels;
    for (const auto& code : all_codes()) levels.push_back(simulate_code(setup, cell, code).v_out);
    CHECK(distinct(levels, 1e-9) > 10);
}
