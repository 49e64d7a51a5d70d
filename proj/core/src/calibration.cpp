#include "mlm/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include <fmt/format.h>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>
#include <gsl/gsl_vector.h>

#include "mlm/errors.hpp"

namespace mlm {

std::string_view to_string(FitParam p) {
    switch (p) {
        case FitParam::ROn: return "r_on";
        case FitParam::ROff: return "r_off";
        case FitParam::DriftRate: return "drift_rate";
        case FitParam::VThPos: return "v_th_pos";
        case FitParam::RGround: return "r_ground";
    }
    return "unknown";
}

FitParam parse_fit_param(std::string_view name) {
    for (FitParam p : kAllFitParams) {
        if (to_string(p) == name) return p;
    }
    throw InvalidParameter("unknown calibration parameter '" + std::string(name) + "'");
}

SimSetup reference_initial_guess() {
    SimSetup s;
    s.device.params.r_on = 200.0e3;
    s.device.params.r_off = 5.0e6;
    s.device.params.drift_rate = 2000.0;
    s.device.params.v_th_pos = 2.32;
    s.topology.r_ground = 17.34e3;
    return s;
}

std::vector<double> simulate_targets(const SimSetup& setup, std::span<const CalibrationTarget> targets) {
    const MlmCell cell = build_mlm_cell(setup.topology);
    std::vector<double> out;
    out.reserve(targets.size());
    for (const auto& t : targets) out.push_back(simulate_code(setup, cell, t.code).v_out);
    return out;
}

double min_separation_fraction(std::span<const double> values) {
    if (values.size() < 2) return 0.0;
    std::vector<double> v(values.begin(), values.end());
    std::sort(v.begin(), v.end());
    const double span = v.back() - v.front();
    if (!(span > 0.0)) return 0.0;
    double gap = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < v.size(); ++i) gap = std::min(gap, v[i] - v[i - 1]);
    return gap / span;
}

double pulse_saturation(const SimSetup& setup) {
    const auto& p = setup.device.params;
    MemristorState st = reset_state(p);
    const auto steps = static_cast<long>(std::llround(setup.cycle.t_write / setup.cycle.dt));
    for (long i = 0; i < steps; ++i) {
        st = step(st, setup.encoder.write_levels[2], setup.cycle.dt, p, setup.device.kind);
    }
    return st.w;
}

namespace {

double relative_sse(std::span<const double> sim, std::span<const CalibrationTarget> targets) {
    double sse = 0.0;
    for (std::size_t i = 0; i < targets.size(); ++i) {
        const double rel = (sim[i] - targets[i].v_out) / targets[i].v_out;
        sse += rel * rel;
    }
    return std::isfinite(sse) ? sse : std::numeric_limits<double>::infinity();
}

}  // namespace

double calibration_residual(const SimSetup& setup, std::span<const CalibrationTarget> targets) {
    try {
        setup.validate();
        return relative_sse(simulate_targets(setup, targets), targets);
    } catch (const Error&) {
        return std::numeric_limits<double>::infinity();
    }
}

namespace {

// r_off is carried as log(r_off - r_on) so that r_off > r_on everywhere.
std::vector<double> to_coords(const SimSetup& s, std::span<const FitParam> free) {
    const auto& p = s.device.params;
    std::vector<double> x;
    for (FitParam f : free) {
        switch (f) {
            case FitParam::ROn: x.push_back(std::log(p.r_on)); break;
            case FitParam::ROff: x.push_back(std::log(p.r_off - p.r_on)); break;
            case FitParam::DriftRate: x.push_back(std::log(p.drift_rate)); break;
            case FitParam::VThPos: x.push_back(std::log(p.v_th_pos)); break;
            case FitParam::RGround: x.push_back(std::log(s.topology.r_ground)); break;
        }
    }
    return x;
}

SimSetup from_coords(const SimSetup& base, std::span<const FitParam> free, std::span<const double> x) {
    SimSetup s = base;
    auto& p = s.device.params;
    const double gap = p.r_off - p.r_on;
    double new_gap = gap;
    for (std::size_t i = 0; i < free.size(); ++i) {
        const double v = std::exp(x[i]);
        switch (free[i]) {
            case FitParam::ROn: p.r_on = v; break;
            case FitParam::ROff: new_gap = v; break;
            case FitParam::DriftRate: p.drift_rate = v; break;
            case FitParam::VThPos: p.v_th_pos = v; break;
            case FitParam::RGround: s.topology.r_ground = v; break;
        }
    }
    p.r_off = p.r_on + new_gap;
    return s;
}

double param_value(const SimSetup& s, FitParam f) {
    switch (f) {
        case FitParam::ROn: return s.device.params.r_on;
        case FitParam::ROff: return s.device.params.r_off;
        case FitParam::DriftRate: return s.device.params.drift_rate;
        case FitParam::VThPos: return s.device.params.v_th_pos;
        case FitParam::RGround: return s.topology.r_ground;
    }
    return 0.0;
}

constexpr double kRejected = 1e30;

struct Objective {
    const SimSetup* base;
    std::span<const FitParam> free;
    std::span<const CalibrationTarget> targets;
    const CalibrationOptions* options;
    std::size_t evaluations = 0;

    // Plain residual for admissible points. Points closer than the minimum
    // level separation rank behind all of them, ordered by the shortfall.
    double penalized(const SimSetup& s) {
        ++evaluations;
        for (FitParam f : free) {
            const double v = param_value(s, f);
            const ParamBounds b = options->bounds[static_cast<std::size_t>(f)];
            if (!(v >= b.lo && v <= b.hi)) return kRejected;
        }
        std::vector<double> sim;
        try {
            s.validate();
            if (options->min_saturation_state > 0.0 && pulse_saturation(s) < options->min_saturation_state) {
                return kRejected;
            }
            sim = simulate_targets(s, targets);
        } catch (const Error&) {
            return kRejected;
        }
        const double sse = relative_sse(sim, targets);
        if (!std::isfinite(sse)) return kRejected;
        const double need = options->min_separation_fraction;
        if (need > 0.0) {
            const double got = min_separation_fraction(sim);
            if (got < need) return sse + 1e3 * (1.0 + (need - got) / need);
        }
        return sse;
    }
};

double objective(const gsl_vector* v, void* data) {
    auto* obj = static_cast<Objective*>(data);
    std::vector<double> x(v->size);
    for (std::size_t i = 0; i < v->size; ++i) x[i] = gsl_vector_get(v, i);
    return obj->penalized(from_coords(*obj->base, obj->free, x));
}

struct StartResult {
    std::vector<double> x;
    double f;
};

StartResult minimize_from(Objective& obj, std::vector<double> x0, const CalibrationOptions& opt) {
    const std::size_t n = x0.size();
    gsl_multimin_function fn{&objective, n, &obj};
    gsl_vector* x = gsl_vector_alloc(n);
    gsl_vector* step = gsl_vector_alloc(n);
    for (std::size_t i = 0; i < n; ++i) {
        gsl_vector_set(x, i, x0[i]);
        gsl_vector_set(step, i, opt.initial_step);
    }
    gsl_multimin_fminimizer* m = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, n);
    gsl_multimin_fminimizer_set(m, &fn, x, step);

    for (std::size_t it = 0; it < opt.max_iterations; ++it) {
        if (gsl_multimin_fminimizer_iterate(m) != GSL_SUCCESS) break;
        if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(m), opt.size_tolerance) == GSL_SUCCESS) break;
    }
    StartResult r{std::vector<double>(n), gsl_multimin_fminimizer_minimum(m)};
    const gsl_vector* best = gsl_multimin_fminimizer_x(m);
    for (std::size_t i = 0; i < n; ++i) r.x[i] = gsl_vector_get(best, i);

    gsl_multimin_fminimizer_free(m);
    gsl_vector_free(step);
    gsl_vector_free(x);
    return r;
}

}  // namespace

CalibrationResult calibrate(const SimSetup& initial, std::span<const CalibrationTarget> targets,
                            const CalibrationOptions& options) {
    if (targets.empty()) throw InvalidParameter("calibration needs at least one target");
    for (const auto& t : targets) {
        if (!(t.v_out > 0.0)) throw InvalidParameter("calibration targets must be positive voltages");
    }
    if (options.free.empty()) throw InvalidParameter("calibration needs at least one free parameter");
    if (options.restarts == 0) throw InvalidParameter("calibration needs at least one start");
    initial.validate();

    gsl_error_handler_t* previous = gsl_set_error_handler_off();

    CalibrationResult result;
    result.fitted = initial;
    result.initial_residual = calibration_residual(initial, targets);
    result.final_residual = result.initial_residual;

    Objective obj{&initial, options.free, targets, &options};
    const double initial_score = obj.penalized(initial);
    const std::vector<double> x0 = to_coords(initial, options.free);
    std::mt19937_64 rng(options.seed);
    std::normal_distribution<double> gauss(0.0, options.restart_spread);

    std::vector<double> best_x = x0;
    double best_f = initial_score;
    for (std::size_t start = 0; start < options.restarts; ++start) {
        std::vector<double> xs = x0;
        if (start > 0) {
            for (double& c : xs) c += gauss(rng);
        }
        const StartResult r = minimize_from(obj, xs, options);
        if (r.f < initial_score) ++result.improving_starts;
        if (r.f < best_f) {
            best_f = r.f;
            best_x = r.x;
        }
    }
    gsl_set_error_handler(previous);

    result.evaluations = obj.evaluations;
    if (best_f < initial_score) {
        result.fitted = from_coords(initial, options.free, best_x);
        result.improved = true;
    }

    const auto sim = simulate_targets(result.fitted, targets);
    result.final_residual = relative_sse(sim, targets);
    result.min_separation_fraction = min_separation_fraction(sim);
    for (std::size_t i = 0; i < targets.size(); ++i) {
        result.per_code.push_back(
            {targets[i].code, targets[i].v_out, sim[i], (sim[i] - targets[i].v_out) / targets[i].v_out});
    }
    std::vector<std::size_t> order(targets.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return sim[a] < sim[b]; });
    for (std::size_t i : order) result.ordering.push_back(targets[i].code);
    result.inversions = count_inversions(sim);
    return result;
}

RoundTripReport calibration_round_trip(const SimSetup& truth, CalibrationOptions options, double start_offset) {
    truth.validate();
    std::vector<CalibrationTarget> targets;
    for (const BinRow& row : truth.table.rows) targets.push_back({row.code, 0.0});
    const auto synthetic = simulate_targets(truth, targets);
    for (std::size_t i = 0; i < targets.size(); ++i) targets[i].v_out = synthetic[i];

    std::vector<double> x = to_coords(truth, options.free);
    for (std::size_t i = 0; i < x.size(); ++i) x[i] += (i % 2 == 0 ? start_offset : -start_offset);
    const SimSetup start = from_coords(truth, options.free, x);

    options.min_separation_fraction = 0.0;
    RoundTripReport report{calibrate(start, targets, options), 0.0};
    for (const auto& f : report.fit.per_code) {
        report.max_relative_error = std::max(report.max_relative_error, std::abs(f.relative_error));
    }
    return report;
}

void require_improvement(const CalibrationResult& result) {
    if (!result.improved) {
        throw CalibrationFailed(fmt::format("calibration did not improve the initial residual {:.6g}",
                                            result.initial_residual));
    }
}

}  // namespace mlm
