#include <vector>

#include <benchmark/benchmark.h>

#include "mlm/calibration.hpp"
#include "mlm/controller.hpp"

using namespace mlm;

static void BM_SolveCellRead(benchmark::State& state) {
    const MlmCell cell = build_mlm_cell(CellTopology{});
    auto drives = cell.idle_drives();
    drives[cell.read_port] = {true, 0.05};
    const std::vector<double> r{2e5, 1e6, 6e6};
    for (auto _ : state) benchmark::DoNotOptimize(solve_dc(cell.netlist, r, drives));
}
BENCHMARK(BM_SolveCellRead);

static void BM_CachedSolve(benchmark::State& state) {
    const MlmCell cell = build_mlm_cell(CellTopology{});
    auto drives = cell.idle_drives();
    drives[cell.read_port] = {true, 0.05};
    DcSystem sys(cell.netlist, drives);
    std::vector<double> r{2e5, 1e6, 6e6};
    for (auto _ : state) {
        r[0] *= 1.0000001;
        benchmark::DoNotOptimize(sys.solve_voltages(r));
    }
}
BENCHMARK(BM_CachedSolve);

static void BM_DeviceStep(benchmark::State& state) {
    const MemristorParams p;
    MemristorState s{0.1};
    for (auto _ : state) {
        s = step(s, 3.5, 1e-9, p, DeviceModelKind::ThresholdDrift);
        benchmark::DoNotOptimize(s);
    }
}
BENCHMARK(BM_DeviceStep);

static void BM_Cycle(benchmark::State& state) {
    const SimSetup setup;
    const MlmCell cell = build_mlm_cell(setup.topology);
    const auto code = TernaryCode::parse("012");
    for (auto _ : state) benchmark::DoNotOptimize(simulate_code(setup, cell, code));
}
BENCHMARK(BM_Cycle)->Unit(benchmark::kMillisecond);

static void BM_EncodeStructural(benchmark::State& state) {
    const BinTable table = BinTable::reference();
    const EncoderConfig cfg;
    double v = 0.0;
    for (auto _ : state) {
        v = v + 0.0137 > 3.0 ? 0.0 : v + 0.0137;
        benchmark::DoNotOptimize(encode_structural(v, table, cfg));
    }
}
BENCHMARK(BM_EncodeStructural);

static void BM_CalibrationResidual(benchmark::State& state) {
    const SimSetup setup;
    std::vector<CalibrationTarget> targets;
    for (const auto& row : setup.table.rows) targets.push_back({row.code, 5e-3});
    for (auto _ : state) benchmark::DoNotOptimize(calibration_residual(setup, targets));
}
BENCHMARK(BM_CalibrationResidual)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
