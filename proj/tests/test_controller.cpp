#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include <doctest.h>

#include "mlm/controller.hpp"
#include "mlm/errors.hpp"

using namespace mlm;

namespace {

std::vector<MemristorState> fresh(const SimSetup& s, const MlmCell& cell) {
    return std::vector<MemristorState>(cell.netlist.device_count(), reset_state(s.device.params));
}

}  // namespace

TEST_CASE("a cycle is deterministic") {
    SimSetup s;
    const MlmCell cell = build_mlm_cell(s.topology);
    const auto code = TernaryCode::parse("012");
    CHECK(simulate_code(s, cell, code) == simulate_code(s, cell, code));
    const Perturbation noise{1e-3, 99};
    CHECK(simulate_code(s, cell, code, noise) == simulate_code(s, cell, code, noise));
    CHECK(simulate_code(s, cell, code, noise).v_out != simulate_code(s, cell, code, {1e-3, 100}).v_out);
}

TEST_CASE("recorded measurement fields") {
    SimSetup s;
    const MlmCell cell = build_mlm_cell(s.topology);
    const Measurement m = simulate_code(s, cell, TernaryCode::parse("201"));
    CHECK(m.code.str() == "201");
    CHECK(m.applied.port_voltages == std::vector<double>{4.0, 0.0, 2.5});
    CHECK(m.temperature == s.cycle.temperature);
    CHECK(m.final_w.size() == 3);
    CHECK(std::isfinite(m.v_out));
    CHECK(m.final_w[0] > m.final_w[2]);
    CHECK(m.final_w[2] > m.final_w[1]);
}

TEST_CASE("skipping the write phase reads the all-reset level") {
    SimSetup s;
    s.cycle.t_write = 0.0;
    const MlmCell cell = build_mlm_cell(s.topology);
    const double reset_level = simulate_code(s, cell, TernaryCode::parse("000")).v_out;
    for (const char* code : {"222", "012", "111"}) {
        const Measurement m = simulate_code(s, cell, TernaryCode::parse(code));
        CHECK(m.v_out == reset_level);
        for (double w : m.final_w) CHECK(w == 0.0);
    }
}

TEST_CASE("highest code reads lowest and the all-zero code reads highest") {
    SimSetup s;
    const LevelReport r = write_then_read_all_codes(s);
    REQUIRE(r.sorted.size() == 10);
    CHECK(r.sorted.front().code.str() == "222");
    CHECK(r.sorted.back().code.str() == "000");
    CHECK(r.min_separation >= 0.02 * r.span);
    CHECK(r.inversions <= 45);
    for (std::size_t i = 1; i < r.sorted.size(); ++i) CHECK(r.sorted[i - 1].v_out <= r.sorted[i].v_out);
    std::set<std::size_t> rows(r.table_rows.begin(), r.table_rows.end());
    CHECK(rows.size() == 10);
}

TEST_CASE("sweep is a staircase over the table bins") {
    SimSetup s;
    const auto sweep = run_input_sweep(s, EncoderPath::Behavioral);
    REQUIRE(sweep.size() == 61);
    std::set<double> levels;
    std::vector<double> by_row(10, std::nan(""));
    for (const Measurement& m : sweep) {
        const std::size_t row = bin_index(*m.v_in, s.table);
        if (std::isnan(by_row[row])) by_row[row] = m.v_out;
        CHECK(m.v_out == by_row[row]);
        CHECK(m.code == s.table.rows[row].code);
        for (double v : m.applied.port_voltages) CHECK((v == 0.0 || v == 2.5 || v == 4.0));
        levels.insert(m.v_out);
    }
    CHECK(levels.size() == 10);

    const auto structural = run_input_sweep(s, EncoderPath::Structural);
    const auto edges = s.table.interior_edges();
    for (std::size_t i = 0; i < sweep.size(); ++i) {
        const double v = *sweep[i].v_in;
        const bool near = std::any_of(edges.begin(), edges.end(), [&](double e) { return std::abs(v - e) < 5e-3; });
        if (!near) CHECK(structural[i].v_out == sweep[i].v_out);
    }
}

TEST_CASE("halving dt moves every level by at most 0.5%") {
    SimSetup coarse;
    SimSetup fine;
    fine.cycle.dt = coarse.cycle.dt / 2.0;
    const MlmCell cell = build_mlm_cell(coarse.topology);
    for (const BinRow& row : coarse.table.rows) {
        const double a = simulate_code(coarse, cell, row.code).v_out;
        const double b = simulate_code(fine, cell, row.code).v_out;
        CAPTURE(row.code.str());
        CHECK(std::abs(a - b) <= 0.005 * std::abs(b));
    }
}

TEST_CASE("reads do not disturb stored states") {
    SimSetup s;
    const MlmCell cell = build_mlm_cell(s.topology);
    for (const BinRow& row : s.table.rows) {
        auto devices = fresh(s, cell);
        const Measurement m = run_cycle(cell, devices, s.device, code_to_write_voltages(row.code), s.cycle);
        CHECK(m.read_disturbance < 1e-3);
    }
}

TEST_CASE("a second reset changes nothing") {
    SimSetup s;
    s.cycle.t_write = 0.0;
    const MlmCell cell = build_mlm_cell(s.topology);
    const WritePattern idle = code_to_write_voltages(TernaryCode::parse("000"));
    std::vector<MemristorState> once(3, MemristorState{1.0});
    run_cycle(cell, once, s.device, idle, s.cycle);
    std::vector<MemristorState> twice(3, MemristorState{1.0});
    run_cycle(cell, twice, s.device, idle, s.cycle);
    run_cycle(cell, twice, s.device, idle, s.cycle);
    for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(once[i].w - twice[i].w) <= 1e-9);
}

TEST_CASE("temperature study statistics") {
    SimSetup s;
    const std::vector<TernaryCode> codes{TernaryCode::parse("222"), TernaryCode::parse("000")};
    const std::vector<double> temps{20.0, 50.0};

    const StudyResult quiet = run_temperature_study(s, codes, temps, 3, NoiseConfig{0.0, 1});
    REQUIRE(quiet.stats.size() == 4);
    CHECK(quiet.trials.size() == 12);
    for (const auto& st : quiet.stats) CHECK(st.stdev == 0.0);
    CHECK(max_relative_temperature_drift(quiet) <= 0.01);

    const NoiseConfig noise{5e-3, 42};
    const StudyResult a = run_temperature_study(s, codes, temps, 4, noise);
    const StudyResult b = run_temperature_study(s, codes, temps, 4, noise);
    for (std::size_t i = 0; i < a.stats.size(); ++i) {
        CHECK(a.stats[i].mean == b.stats[i].mean);
        CHECK(a.stats[i].stdev == b.stats[i].stdev);
        CHECK(a.stats[i].stdev > 0.0);
        double lo = 1e9, hi = -1e9;
        for (const auto& t : a.trials) {
            if (t.code == a.stats[i].code && t.temperature_c == a.stats[i].temperature_c) {
                lo = std::min(lo, t.v_out);
                hi = std::max(hi, t.v_out);
            }
        }
        CHECK(a.stats[i].mean >= lo);
        CHECK(a.stats[i].mean <= hi);
    }
    CHECK_THROWS_AS(run_temperature_study(s, codes, temps, 1, noise), InvalidParameter);
}

TEST_CASE("failure modes") {
    SUBCASE("collapsed levels") {
        SimSetup s;
        s.device.params.drift_rate = 0.0;
        CHECK_THROWS_AS(write_then_read_all_codes(s), DegenerateLevels);
    }
    SUBCASE("read disturbs the devices") {
        SimSetup s;
        s.device.params.v_th_pos = 0.0;
        s.device.params.drift_rate = 1e5;
        const MlmCell cell = build_mlm_cell(s.topology);
        CHECK_THROWS_AS(simulate_code(s, cell, TernaryCode::parse("000")), NonQuiescentRead);
    }
    SUBCASE("bad cycle settings") {
        SimSetup s;
        s.cycle.dt = 1e-4;
        CHECK_THROWS_AS(s.validate(), InvalidParameter);
        const MlmCell cell = build_mlm_cell(s.topology);
        auto devices = fresh(s, cell);
        CHECK_THROWS_AS(run_cycle(cell, devices, s.device, WritePattern{{0.0}}, SimSetup{}.cycle), InvalidParameter);
    }
}

TEST_CASE("ideal three-state devices") {
    SimSetup s;
    s.device.kind = DeviceModelKind::IdealThreeState;
    const MlmCell cell = build_mlm_cell(s.topology);
    const Measurement m = simulate_code(s, cell, TernaryCode::parse("210"));
    CHECK(m.final_w == std::vector<double>{1.0, 0.5, 0.0});
    CHECK(simulate_code(s, cell, TernaryCode::parse("222")).v_out < simulate_code(s, cell, TernaryCode::parse("000")).v_out);
}

TEST_CASE("inversion count") {
    CHECK(count_inversions(std::vector<double>{1, 2, 3}) == 0);
    CHECK(count_inversions(std::vector<double>{3, 2, 1}) == 3);
    CHECK(count_inversions(std::vector<double>{2, 1, 3, 0}) == 4);
}
