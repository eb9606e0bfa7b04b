#include <benchmark/benchmark.h>

#include "ikd/align.hpp"
#include "ikd/eval.hpp"
#include "ikd/replay.hpp"
#include "ikd/script.hpp"
#include "ikd/simcore.hpp"

namespace {

void BM_StepDynamics(benchmark::State& state) {
  const ikd::SlipParams p;
  ikd::VehicleState s;
  const ikd::ControlCommand cmd{2.0, 0.63};
  for (auto _ : state) {
    s = ikd::step_dynamics(s, cmd, p, ikd::kDefaultSimDt);
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_StepDynamics);

void BM_RunScenario(benchmark::State& state) {
  ikd::TeleopOptions o;
  o.duration = static_cast<double>(state.range(0));
  const auto script = ikd::make_teleop_script(o, 11);
  const ikd::SlipParams p;
  for (auto _ : state) {
    benchmark::DoNotOptimize(ikd::run_scenario(script, p, o.duration));
  }
}
BENCHMARK(BM_RunScenario)->Arg(60)->Unit(benchmark::kMillisecond);

void BM_EstimateDelay(benchmark::State& state) {
  ikd::TeleopOptions o;
  o.duration = static_cast<double>(state.range(0));
  const ikd::SlipParams p;
  const auto trace = ikd::run_scenario(ikd::make_teleop_script(o, 11), p, o.duration);
  const auto [joy, imu] = ikd::emit_sensor_logs(trace, p);
  for (auto _ : state) {
    benchmark::DoNotOptimize(ikd::estimate_delay(joy, imu));
  }
}
BENCHMARK(BM_EstimateDelay)->Arg(60)->Arg(600)->Unit(benchmark::kMillisecond);

void BM_DriftEval(benchmark::State& state) {
  const ikd::SlipParams p;
  const ikd::DriftOptions d;
  const auto script = ikd::make_drift_script(d);
  const auto trace = ikd::run_scenario(script, p, ikd::drift_script_duration(d));
  const auto scenario = ikd::loose_drift_scenario();
  for (auto _ : state) {
    benchmark::DoNotOptimize(ikd::drift_eval(trace, scenario));
  }
}
BENCHMARK(BM_DriftEval);

void BM_Replay(benchmark::State& state) {
  const ikd::SlipParams p;
  const ikd::DriftOptions d;
  const auto trace = ikd::run_scenario(ikd::make_drift_script(d), p, ikd::drift_script_duration(d));
  const auto joy = ikd::emit_sensor_logs(trace, p).first;
  ikd::ReplayOptions opts;
  opts.stride = 2;
  opts.duration = static_cast<double>(joy.size()) / 40.0;
  const auto model = ikd::init_params(1);
  for (auto _ : state) {
    auto buf = ikd::load_buffer(joy);
    benchmark::DoNotOptimize(ikd::execute_replay(buf, p, model, opts));
  }
}
BENCHMARK(BM_Replay);

}  // namespace

BENCHMARK_MAIN();
