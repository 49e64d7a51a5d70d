#pragma once

#include <string_view>

namespace mlm {

/// Compact-model constants shared by every memristor of a cell.
///
/// The normalized state w maps linearly onto [r_on, r_off]; reset drives w
/// toward 0 (low resistance) and positive write pulses drive it toward 1.
struct MemristorParams {
    double r_on = 212.154e3;     ///< ohms at w = 0
    double r_off = 6.09986e6;    ///< ohms at w = 1
    double v_th_pos = 2.42612;   ///< programming threshold, volts
    double v_th_neg = -1.0;      ///< reset threshold, volts (negative)
    double drift_rate = 1259.62; ///< 1/(V*s)
    int window_p = 4;            ///< window exponent
    double temp_coeff = 1.0e-4;  ///< 1/K
    double t_ref = 293.15;       ///< K

    // IdealThreeState snap targets for a logic-1 and logic-2 write level.
    double ideal_w1 = 0.5;
    double ideal_w2 = 1.0;

    /// Throws InvalidParameter when an invariant is violated.
    void validate() const;
};

struct MemristorState {
    double w = 0.0;

    friend bool operator==(const MemristorState&, const MemristorState&) = default;
};

enum class DeviceModelKind {
    IdealThreeState,
    LinearDrift,
    ThresholdDrift,
};

std::string_view to_string(DeviceModelKind kind);
DeviceModelKind parse_device_model(std::string_view name);

double resistance(MemristorState state, const MemristorParams& params, double temperature_k);

/// Window factor for a state moving under voltage v.
///
/// Joglekar form 1 - (2w - 1)^(2p) whenever the drive pushes w toward the
/// bound it is nearer to; 1 when it pushes w away from that bound. The
/// factor is zero at a bound only for motion into it, so a device sitting
/// at w = 0 after a reset can still be programmed.
double window(double w, double v, int p);

/// State velocity dw/dt for a constant device voltage (drift kinds only).
double drift_velocity(double w, double v, const MemristorParams& params, DeviceModelKind kind);

/// Advance one timestep holding v constant. Drift kinds use a classical
/// fourth-order Runge-Kutta update; the result is clamped to [0, 1].
///
/// For IdealThreeState, v is interpreted as the applied port level and the
/// state snaps to the matching resistance regardless of dt.
MemristorState step(MemristorState state, double v, double dt, const MemristorParams& params,
                    DeviceModelKind kind);

MemristorState reset_state(const MemristorParams& params);

}  // namespace mlm
