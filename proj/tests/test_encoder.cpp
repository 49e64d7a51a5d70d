#include <array>
#include <cmath>
#include <random>
#include <set>

#include <doctest.h>

#include "mlm/encoder.hpp"
#include "mlm/errors.hpp"

using namespace mlm;

namespace {

struct Row {
    double a1, a2;
    std::array<int, 3> trits;
};

// Input ranges and (V_w1, V_w2, V_w3) trits, transcribed independently.
constexpr std::array<Row, 10> kTable1{{
    {0.00, 0.30, {2, 2, 2}},
    {0.31, 0.60, {1, 2, 2}},
    {0.61, 0.90, {1, 1, 2}},
    {0.91, 1.20, {0, 2, 2}},
    {1.21, 1.50, {0, 1, 2}},
    {1.51, 1.80, {1, 1, 1}},
    {1.81, 2.10, {0, 0, 2}},
    {2.11, 2.40, {0, 1, 1}},
    {2.41, 2.70, {0, 0, 1}},
    {2.71, 3.00, {0, 0, 0}},
}};

}  // namespace

TEST_CASE("behavioral encoder reproduces every table assignment") {
    const BinTable table = BinTable::reference();
    int assignments = 0;
    for (const Row& r : kTable1) {
        for (double v : {r.a1, 0.5 * (r.a1 + r.a2), r.a2}) {
            CAPTURE(v);
            const TernaryCode code = encode_behavioral(v, table);
            REQUIRE(code.size() == 3);
            for (std::size_t port = 0; port < 3; ++port) CHECK(code[port] == r.trits[port]);
        }
        assignments += 3;
    }
    CHECK(assignments == 30);
}

TEST_CASE("worked example 1.3 V") {
    const TernaryCode code = encode_behavioral(1.3, BinTable::reference());
    CHECK(code.str() == "012");
    CHECK(code_to_write_voltages(code).port_voltages == std::vector<double>{0.0, 2.5, 4.0});
    CHECK(encode_behavioral(3.0, BinTable::reference()).str() == "000");
}

TEST_CASE("gaps between printed ranges belong to the lower row") {
    const BinTable table = BinTable::reference();
    CHECK(encode_behavioral(0.305, table).str() == "222");
    CHECK(encode_behavioral(0.31, table).str() == "122");
    CHECK(encode_behavioral(2.7099, table).str() == "001");
}

TEST_CASE("inputs outside the domain") {
    const BinTable table = BinTable::reference();
    CHECK_THROWS_AS(encode_behavioral(-0.01, table), OutOfRange);
    CHECK_THROWS_AS(encode_behavioral(3.0001, table), OutOfRange);
    CHECK_THROWS_AS(encode_behavioral(std::nan(""), table), OutOfRange);
    CHECK_THROWS_AS(encode_structural(5.0, table, EncoderConfig{}), OutOfRange);
}

TEST_CASE("step function with nine interior discontinuities and monotone rows") {
    const BinTable table = BinTable::reference();
    std::size_t changes = 0;
    std::size_t prev = bin_index(0.0, table);
    for (int i = 1; i <= 30000; ++i) {
        const std::size_t row = bin_index(i * 1e-4, table);
        CHECK(row >= prev);
        if (row != prev) ++changes;
        prev = row;
    }
    CHECK(changes == 9);
    std::set<TernaryCode> codes;
    for (const auto& r : table.rows) codes.insert(r.code);
    CHECK(codes.size() == 10);
}

TEST_CASE("level mapping is a bijection") {
    for (int t = 0; t < 3; ++t) {
        const auto v = code_to_write_voltages(TernaryCode{t}).port_voltages.at(0);
        CHECK(v == kWriteLevels[static_cast<std::size_t>(t)]);
        CHECK(quantize_write_voltage(v, EncoderConfig{}) == t);
    }
}

TEST_CASE("structural path matches behavioral on the sweep grid") {
    const BinTable table = BinTable::reference();
    const EncoderConfig cfg;
    const auto grid = sweep_grid(0.0, 3.0, 0.05);
    REQUIRE(grid.size() == 61);
    CHECK(grid.back() == 3.0);
    const auto report = check_equivalence(table, cfg, grid);
    CHECK(report.mismatches.empty());
    CHECK(report.checked + report.skipped_near_edge == 61);
    CHECK(report.checked >= 50);

    for (double v : grid) {
        const WritePattern w = encode_structural(v, table, cfg);
        for (double p : w.port_voltages) {
            const bool logic2 = p >= 3.8;
            const bool logic1 = p >= 2.0 && p <= 2.6;
            const bool logic0 = p >= -0.2 && p <= 0.05;
            CHECK((logic2 || logic1 || logic0));
        }
    }
}

TEST_CASE("structural equivalence on random inputs") {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 3.0);
    std::vector<double> grid(10000);
    for (double& v : grid) v = u(rng);
    const auto report = check_equivalence(BinTable::reference(), EncoderConfig{}, grid);
    CHECK(report.mismatches.empty());
    CHECK(report.checked > 9000);
}

TEST_CASE("comparator offset only disturbs decisions near bin edges") {
    EncoderConfig cfg;
    cfg.comparator_offset = 0.05;
    const BinTable table = BinTable::reference();
    const auto grid = sweep_grid(0.0, 3.0, 0.002);
    const auto report = check_equivalence(table, cfg, grid, 0.0);
    CHECK_FALSE(report.mismatches.empty());
    const auto edges = table.interior_edges();
    for (const auto& m : report.mismatches) {
        double nearest = 1e9;
        for (double e : edges) nearest = std::min(nearest, std::abs(m.v_in - e));
        CHECK(nearest <= 0.05 + 1e-12);
    }
}

TEST_CASE("empty grid gives an empty report") {
    const auto report = check_equivalence(BinTable::reference(), EncoderConfig{}, std::vector<double>{});
    CHECK(report.checked == 0);
    CHECK(report.mismatches.empty());
}

TEST_CASE("ternary codes and table validation") {
    CHECK(TernaryCode::parse("201").str() == "201");
    CHECK_THROWS_AS(TernaryCode::parse("213"), InvalidParameter);
    CHECK_THROWS_AS(TernaryCode::parse(""), InvalidParameter);
    CHECK_THROWS_AS((TernaryCode{0, 3}), InvalidParameter);
    BinTable t = BinTable::reference();
    CHECK_NOTHROW(t.validate());
    CHECK(t.row_of(TernaryCode::parse("111")) == 5);
    t.rows[3].code = t.rows[2].code;
    CHECK_THROWS_AS(t.validate(), InvalidParameter);
    t = BinTable::reference();
    t.rows[4].a1 = 1.0;
    CHECK_THROWS_AS(t.validate(), InvalidParameter);
    CHECK_THROWS_AS(sweep_grid(1.0, 0.0, 0.1), InvalidParameter);
}
