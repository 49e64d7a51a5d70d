#include <cmath>
#include <vector>

#include <doctest.h>

#include "mlm/calibration.hpp"
#include "mlm/errors.hpp"

using namespace mlm;

namespace {

std::vector<CalibrationTarget> synthetic(const SimSetup& truth) {
    std::vector<CalibrationTarget> targets;
    const MlmCell cell = build_mlm_cell(truth.topology);
    for (const BinRow& row : truth.table.rows) targets.push_back({row.code, simulate_code(truth, cell, row.code).v_out});
    return targets;
}

CalibrationOptions quick() {
    CalibrationOptions o;
    o.restarts = 2;
    o.max_iterations = 15;
    o.min_separation_fraction = 0.0;
    return o;
}

}  // namespace

TEST_CASE("residual of exact targets is zero") {
    const SimSetup s;
    const auto targets = synthetic(s);
    CHECK(calibration_residual(s, targets) == 0.0);
    auto shifted = targets;
    shifted[0].v_out *= 1.1;
    CHECK(calibration_residual(s, shifted) == doctest::Approx(std::pow(1.0 / 1.1 - 1.0, 2)));
}

TEST_CASE("an already optimal start is returned unchanged") {
    const SimSetup s;
    const auto targets = synthetic(s);
    const CalibrationResult r = calibrate(s, targets, quick());
    CHECK_FALSE(r.improved);
    CHECK(r.initial_residual == 0.0);
    CHECK(r.final_residual == 0.0);
    CHECK(r.fitted.device.params.r_on == s.device.params.r_on);
    CHECK(r.fitted.topology.r_ground == s.topology.r_ground);
    CHECK(r.improving_starts == 0);
    CHECK_THROWS_AS(require_improvement(r), CalibrationFailed);
}

TEST_CASE("a single free parameter is recovered") {
    const SimSetup truth;
    const auto targets = synthetic(truth);
    SimSetup start = truth;
    start.topology.r_ground *= 1.3;
    CalibrationOptions o = quick();
    o.free = {FitParam::RGround};
    o.restarts = 1;
    o.max_iterations = 200;
    o.size_tolerance = 1e-8;
    const CalibrationResult r = calibrate(start, targets, o);
    CHECK(r.improved);
    CHECK_NOTHROW(require_improvement(r));
    CHECK(r.final_residual < 1e-10);
    CHECK(r.fitted.topology.r_ground == doctest::Approx(truth.topology.r_ground).epsilon(1e-4));
    REQUIRE(r.per_code.size() == targets.size());
    for (const CodeFit& f : r.per_code) CHECK(std::abs(f.relative_error) <= 1e-4);
    CHECK(r.ordering.front().str() == "222");
}

TEST_CASE("separation fraction helper") {
    CHECK(min_separation_fraction(std::vector<double>{}) == 0.0);
    CHECK(min_separation_fraction(std::vector<double>{1.0}) == 0.0);
    CHECK(min_separation_fraction(std::vector<double>{0.0, 1.0, 0.25}) == doctest::Approx(0.25));
    CHECK(min_separation_fraction(std::vector<double>{4.0, 0.0, 2.0, 3.0}) == doctest::Approx(0.25));
}

TEST_CASE("the top write level saturates the default device") {
    CHECK(pulse_saturation(SimSetup{}) >= 0.995);
    SimSetup weak;
    weak.device.params.drift_rate = 10.0;
    CHECK(pulse_saturation(weak) < 0.5);
}

TEST_CASE("an unsimulatable point has infinite residual") {
    SimSetup s;
    const auto targets = synthetic(s);
    s.device.params.r_off = s.device.params.r_on / 2.0;
    CHECK(std::isinf(calibration_residual(s, targets)));
}

TEST_CASE("fit parameter names") {
    for (FitParam p : kAllFitParams) CHECK(parse_fit_param(to_string(p)) == p);
    CHECK_THROWS_AS(parse_fit_param("gain"), InvalidParameter);
}
