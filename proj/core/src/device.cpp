#include "mlm/device.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mlm/errors.hpp"

namespace mlm {

void MemristorParams::validate() const {
    if (!(r_on > 0.0)) throw InvalidParameter("device: r_on must be > 0");
    if (!(r_off > r_on)) throw InvalidParameter("device: r_off must exceed r_on");
    if (!(v_th_pos >= 0.0)) throw InvalidParameter("device: v_th_pos must be >= 0");
    if (!(v_th_neg <= 0.0)) throw InvalidParameter("device: v_th_neg must be <= 0");
    if (!(drift_rate >= 0.0)) throw InvalidParameter("device: drift_rate must be >= 0");
    if (window_p < 1) throw InvalidParameter("device: window_p must be >= 1");
    if (!(t_ref > 0.0)) throw InvalidParameter("device: t_ref must be > 0 K");
    if (!(ideal_w1 >= 0.0 && ideal_w1 <= 1.0 && ideal_w2 >= 0.0 && ideal_w2 <= 1.0)) {
        throw InvalidParameter("device: ideal snap states must lie in [0, 1]");
    }
}

std::string_view to_string(DeviceModelKind kind) {
    switch (kind) {
        case DeviceModelKind::IdealThreeState: return "ideal_three_state";
        case DeviceModelKind::LinearDrift: return "linear_drift";
        case DeviceModelKind::ThresholdDrift: return "threshold_drift";
    }
    return "unknown";
}

DeviceModelKind parse_device_model(std::string_view name) {
    if (name == "ideal_three_state") return DeviceModelKind::IdealThreeState;
    if (name == "linear_drift") return DeviceModelKind::LinearDrift;
    if (name == "threshold_drift") return DeviceModelKind::ThresholdDrift;
    throw InvalidParameter("unknown device model '" + std::string(name) + "'");
}

double resistance(MemristorState state, const MemristorParams& params, double temperature_k) {
    const double r = params.r_on + state.w * (params.r_off - params.r_on);
    return r * (1.0 + params.temp_coeff * (temperature_k - params.t_ref));
}

double window(double w, double v, int p) {
    const bool toward_upper = v > 0.0 && w >= 0.5;
    const bool toward_lower = v < 0.0 && w <= 0.5;
    if (!toward_upper && !toward_lower) return 1.0;
    const double x = 2.0 * w - 1.0;
    return 1.0 - std::pow(x * x, p);
}

double drift_velocity(double w, double v, const MemristorParams& params, DeviceModelKind kind) {
    double drive = v;
    if (kind == DeviceModelKind::ThresholdDrift) {
        // Overdrive past the polarity threshold; continuous at the threshold.
        if (v >= params.v_th_pos && v > 0.0) {
            drive = v - params.v_th_pos;
        } else if (v <= params.v_th_neg && v < 0.0) {
            drive = v - params.v_th_neg;
        } else {
            return 0.0;
        }
    }
    return params.drift_rate * drive * window(w, v, params.window_p);
}

namespace {

double clamp_unit(double w) { return std::clamp(w, 0.0, 1.0); }

MemristorState snap_ideal(MemristorState state, double v, const MemristorParams& params) {
    // Level edges sit midway between the 0 / 2.5 / 4 V write amplitudes.
    if (v <= params.v_th_neg) return {0.0};
    if (v >= 3.25) return {params.ideal_w2};
    if (v >= 1.25) return {params.ideal_w1};
    return state;
}

}  // namespace

MemristorState step(MemristorState state, double v, double dt, const MemristorParams& params,
                    DeviceModelKind kind) {
    if (kind == DeviceModelKind::IdealThreeState) return snap_ideal(state, v, params);

    const double w = state.w;
    const double k1 = drift_velocity(w, v, params, kind);
    if (k1 == 0.0 && kind == DeviceModelKind::ThresholdDrift) return state;  // sub-threshold
    const double k2 = drift_velocity(clamp_unit(w + 0.5 * dt * k1), v, params, kind);
    const double k3 = drift_velocity(clamp_unit(w + 0.5 * dt * k2), v, params, kind);
    const double k4 = drift_velocity(clamp_unit(w + dt * k3), v, params, kind);
    return {clamp_unit(w + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4))};
}

MemristorState reset_state(const MemristorParams&) { return {0.0}; }

}  // namespace mlm
