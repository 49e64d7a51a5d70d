#include <cmath>
#include <random>

#include <doctest.h>

#include "mlm/device.hpp"
#include "mlm/errors.hpp"

using namespace mlm;

namespace {

// Constant-voltage LinearDrift trajectory for window_p = 1. Away from the
// nearer bound the window is 1 (linear ramp); toward it the Joglekar factor
// reduces to 4w(1-w), whose solution is a logistic.
double closed_form(double w0, double kv, double t) {
    if (kv > 0.0) {
        const double t1 = w0 < 0.5 ? (0.5 - w0) / kv : 0.0;
        if (t < t1) return w0 + kv * t;
        const double ws = w0 < 0.5 ? 0.5 : w0;
        return 1.0 / (1.0 + (1.0 - ws) / ws * std::exp(-4.0 * kv * (t - t1)));
    }
    const double rate = -kv;
    const double t1 = w0 > 0.5 ? (w0 - 0.5) / rate : 0.0;
    if (t < t1) return w0 - rate * t;
    const double ws = w0 > 0.5 ? 0.5 : w0;
    return 1.0 / (1.0 + (1.0 - ws) / ws * std::exp(4.0 * rate * (t - t1)));
}

MemristorParams linear_params() {
    MemristorParams p;
    p.drift_rate = 1.0e4;
    p.window_p = 1;
    return p;
}

}  // namespace

TEST_CASE("linear drift follows the closed-form constant-voltage solution") {
    const MemristorParams p = linear_params();
    const double dt = 1e-6;
    struct Case {
        double w0;
        double v;
    };
    for (const Case c : {Case{0.0, 1.0}, Case{0.2, 0.7}, Case{0.6, 1.3}, Case{1.0, -1.0}, Case{0.4, -0.8},
                         Case{0.9, -1.5}}) {
        CAPTURE(c.w0);
        CAPTURE(c.v);
        MemristorState s{c.w0};
        double worst = 0.0;
        for (int i = 1; i <= 600; ++i) {
            s = step(s, c.v, dt, p, DeviceModelKind::LinearDrift);
            worst = std::max(worst, std::abs(s.w - closed_form(c.w0, p.drift_rate * c.v, i * dt)));
        }
        CHECK(worst <= 1e-6);
    }
}

TEST_CASE("logistic branch from the midpoint") {
    const MemristorParams p = linear_params();
    MemristorState s{0.5};
    for (int i = 0; i < 200; ++i) s = step(s, 2.0, 1e-6, p, DeviceModelKind::LinearDrift);
    const double expected = 1.0 / (1.0 + std::exp(-4.0 * p.drift_rate * 2.0 * 200e-6));
    CHECK(s.w == doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("state stays in [0, 1] under random pulse fuzzing") {
    std::mt19937_64 rng(42);
    std::uniform_real_distribution<double> volts(-12.0, 12.0);
    std::uniform_real_distribution<double> dts(1e-9, 1e-3);
    std::uniform_int_distribution<int> ps(1, 6);
    for (auto kind : {DeviceModelKind::LinearDrift, DeviceModelKind::ThresholdDrift, DeviceModelKind::IdealThreeState}) {
        MemristorParams p;
        p.drift_rate = 1e6;
        MemristorState s{0.5};
        bool inside = true;
        for (int i = 0; i < 10000; ++i) {
            p.window_p = ps(rng);
            s = step(s, volts(rng), dts(rng), p, kind);
            inside = inside && s.w >= 0.0 && s.w <= 1.0 && std::isfinite(s.w);
        }
        CHECK(inside);
    }
}

TEST_CASE("threshold drift is gated by both thresholds") {
    MemristorParams p;
    const auto k = DeviceModelKind::ThresholdDrift;
    for (double w : {0.0, 0.3, 0.77, 1.0}) {
        CHECK(step({w}, 0.05, 1e-6, p, k).w == w);
        CHECK(step({w}, p.v_th_pos * 0.99, 1e-3, p, k).w == w);
        CHECK(step({w}, p.v_th_neg * 0.99, 1e-3, p, k).w == w);
    }
    CHECK(drift_velocity(0.2, p.v_th_pos, p, k) == 0.0);
    CHECK(drift_velocity(0.2, p.v_th_pos + 0.1, p, k) == doctest::Approx(p.drift_rate * 0.1));
    CHECK(drift_velocity(0.8, p.v_th_neg - 0.5, p, k) == doctest::Approx(-p.drift_rate * 0.5));
    CHECK(step({0.2}, p.v_th_pos + 0.5, 1e-5, p, k).w > 0.2);
    CHECK(step({0.2}, p.v_th_neg - 0.5, 1e-5, p, k).w < 0.2);
}

TEST_CASE("window is directional and zero only into the nearer bound") {
    for (int p = 1; p <= 4; ++p) {
        CHECK(window(0.0, 1.0, p) == 1.0);
        CHECK(window(0.0, -1.0, p) == 0.0);
        CHECK(window(1.0, 1.0, p) == 0.0);
        CHECK(window(1.0, -1.0, p) == 1.0);
        CHECK(window(0.5, 1.0, p) == 1.0);
        CHECK(window(0.5, -1.0, p) == 1.0);
    }
    CHECK(window(0.75, 1.0, 1) == doctest::Approx(0.75));
}

TEST_CASE("reset convention") {
    MemristorParams p;
    CHECK(reset_state(p).w == 0.0);
    CHECK(resistance(reset_state(p), p, p.t_ref) == p.r_on);
    CHECK(resistance({1.0}, p, p.t_ref) == p.r_off);
    CHECK(resistance({0.0}, p, p.t_ref + 10.0) == doctest::Approx(p.r_on * (1.0 + 10.0 * p.temp_coeff)));
}

TEST_CASE("a full top-level pulse from reset saturates the default device") {
    MemristorParams p;
    MemristorState s = reset_state(p);
    for (int i = 0; i < 600; ++i) s = step(s, 4.0, 1e-6, p, DeviceModelKind::ThresholdDrift);
    CHECK(s.w >= 0.99);
}

TEST_CASE("ideal three-state model snaps to its levels") {
    MemristorParams p;
    const auto k = DeviceModelKind::IdealThreeState;
    CHECK(step({0.3}, 4.0, 1e-6, p, k).w == p.ideal_w2);
    CHECK(step({0.0}, 2.5, 1e-6, p, k).w == p.ideal_w1);
    CHECK(step({0.7}, 0.0, 1e-6, p, k).w == 0.7);
    CHECK(step({0.7}, -4.0, 1e-6, p, k).w == 0.0);
}

TEST_CASE("parameter validation") {
    MemristorParams p;
    CHECK_NOTHROW(p.validate());
    p.r_off = p.r_on / 2;
    CHECK_THROWS_AS(p.validate(), InvalidParameter);
    p = {};
    p.window_p = 0;
    CHECK_THROWS_AS(p.validate(), InvalidParameter);
    p = {};
    p.v_th_neg = 0.5;
    CHECK_THROWS_AS(p.validate(), InvalidParameter);
    CHECK(parse_device_model("linear_drift") == DeviceModelKind::LinearDrift);
    CHECK(to_string(DeviceModelKind::ThresholdDrift) == "threshold_drift");
    CHECK_THROWS_AS(parse_device_model("spice"), InvalidParameter);
}
