#include "ikd/simcore.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

#include <nlohmann/json.hpp>

#include "ikd/error.hpp"

namespace ikd {
namespace {

bool finite(const VehicleState& s) {
  return std::isfinite(s.x) && std::isfinite(s.y) && std::isfinite(s.heading) &&
         std::isfinite(s.v) && std::isfinite(s.av) && std::isfinite(s.av_lag);
}

// Index of the sample interval containing `t` on a grid of spacing `dt`,
// tolerant of representation error at the grid points themselves.
long grid_index(double t, double dt) {
  return static_cast<long>(std::floor(t / dt + 1e-9));
}

}  // namespace

void SlipParams::validate() const {
  if (!std::isfinite(beta) || !std::isfinite(lag_tau) || !std::isfinite(imu_delay) ||
      !std::isfinite(noise_sigma)) {
    throw ValidationError("slip parameters must be finite");
  }
  if (beta < 0.0 || lag_tau < 0.0 || imu_delay < 0.0 || noise_sigma < 0.0) {
    throw ValidationError("slip parameters must be non-negative");
  }
}

void to_json(nlohmann::json& j, const SlipParams& p) {
  j = nlohmann::json{{"beta", p.beta},
                     {"lag_tau", p.lag_tau},
                     {"imu_delay", p.imu_delay},
                     {"noise_sigma", p.noise_sigma},
                     {"seed", p.seed}};
}

void from_json(const nlohmann::json& j, SlipParams& p) {
  SlipParams defaults;
  p.beta = j.value("beta", defaults.beta);
  p.lag_tau = j.value("lag_tau", defaults.lag_tau);
  p.imu_delay = j.value("imu_delay", defaults.imu_delay);
  p.noise_sigma = j.value("noise_sigma", defaults.noise_sigma);
  p.seed = j.value("seed", defaults.seed);
  p.validate();
}

SlipParams load_slip_params(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open slip parameter file " + path.string());
  }
  try {
    return nlohmann::json::parse(in).get<SlipParams>();
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

ControlCommand saturate(const ControlCommand& cmd) {
  const double v = std::clamp(cmd.v, -kSpeedCap, kSpeedCap);
  const double av = v * cmd.c;
  if (std::abs(av) <= kMaxAngularVelocity) {
    return {v, cmd.c};
  }
  return {v, std::copysign(kMaxAngularVelocity, av) / v};
}

double normalize_angle(double angle) {
  double a = std::remainder(angle, 2.0 * std::numbers::pi);
  if (a <= -std::numbers::pi) {
    a += 2.0 * std::numbers::pi;
  }
  return a;
}

VehicleState step_dynamics(const VehicleState& state, const ControlCommand& cmd,
                           const SlipParams& p, double dt) {
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw ValidationError("integration step must be positive and finite");
  }
  if (!std::isfinite(cmd.v) || !std::isfinite(cmd.c)) {
    throw ValidationError("control command must be finite");
  }
  if (!finite(state)) {
    throw ValidationError("vehicle state must be finite");
  }
  p.validate();

  const ControlCommand sat = saturate(cmd);
  const double av_cmd = sat.v * sat.c;
  const double alpha = p.lag_tau > 0.0 ? -std::expm1(-dt / p.lag_tau) : 1.0;

  VehicleState next = state;
  next.v = std::clamp(state.v + alpha * (sat.v - state.v), -kSpeedCap, kSpeedCap);
  next.av_lag = state.av_lag + alpha * (av_cmd - state.av_lag);
  next.av = next.av_lag / (1.0 + p.beta * next.v * next.v * std::abs(next.av_lag));
  next.x = state.x + next.v * std::cos(state.heading) * dt;
  next.y = state.y + next.v * std::sin(state.heading) * dt;
  next.heading = normalize_angle(state.heading + next.av * dt);
  return next;
}

SimTrace run_scenario(const ControlScript& script, const SlipParams& p, double duration, double dt,
                      const VehicleState& initial) {
  if (!(duration > 0.0) || !std::isfinite(duration)) {
    throw ValidationError("scenario duration must be positive");
  }
  if (!(dt > 0.0)) {
    throw ValidationError("integration step must be positive");
  }
  if (script.empty()) {
    throw ValidationError("scenario needs a control script");
  }
  const auto steps = static_cast<std::size_t>(grid_index(duration, dt));
  SimTrace trace;
  trace.dt = dt;
  trace.states.reserve(steps + 1);
  trace.commands.reserve(steps);
  trace.states.push_back(initial);
  for (std::size_t i = 0; i < steps; ++i) {
    const ControlCommand cmd = script.command_at(static_cast<double>(i) * dt);
    trace.commands.push_back(cmd);
    trace.states.push_back(step_dynamics(trace.states.back(), cmd, p, dt));
  }
  return trace;
}

std::pair<JoyLog, ImuLog> emit_sensor_logs(const SimTrace& trace, const SlipParams& p,
                                           const SensorOptions& opts) {
  if (trace.commands.empty() || trace.states.size() != trace.commands.size() + 1) {
    throw ValidationError("cannot emit sensor logs from an empty trace");
  }
  if (!(opts.joy_rate > 0.0) || !(opts.imu_rate > 0.0) || opts.padding < 0.0) {
    throw ValidationError("sensor rates must be positive and padding non-negative");
  }
  p.validate();

  const double dt = trace.dt;
  const auto steps = static_cast<long>(trace.commands.size());
  const double drive_time = trace.duration();
  const double total = drive_time + 2.0 * opts.padding;

  // Yaw rate achieved during step i is reported at the step's start time so
  // the IMU stream lines up with the command that produced it.
  auto yaw_rate_at = [&](double tau) {
    if (tau < -1e-9 || tau >= drive_time - 1e-12) {
      return 0.0;
    }
    const long i = std::clamp(grid_index(tau, dt), 0L, steps - 1);
    const double a0 = trace.states[static_cast<std::size_t>(i) + 1].av;
    if (i + 1 >= steps) {
      return a0;
    }
    const double a1 = trace.states[static_cast<std::size_t>(i) + 2].av;
    const double w = std::clamp(tau / dt - static_cast<double>(i), 0.0, 1.0);
    return a0 + w * (a1 - a0);
  };

  JoyLog joy;
  const auto joy_count = static_cast<std::size_t>(grid_index(total, 1.0 / opts.joy_rate));
  joy.rows.reserve(joy_count);
  for (std::size_t k = 0; k < joy_count; ++k) {
    const double t = static_cast<double>(k) / opts.joy_rate;
    const double tau = t - opts.padding;
    JoySample s{t, 0.0, 0.0};
    if (tau >= -1e-12 && tau < drive_time - 1e-12) {
      const long i = std::clamp(grid_index(tau, dt), 0L, steps - 1);
      const ControlCommand cmd = saturate(trace.commands[static_cast<std::size_t>(i)]);
      s.v = cmd.v;
      s.av = cmd.v * cmd.c;
    }
    joy.rows.push_back(s);
  }

  ImuLog imu;
  std::mt19937_64 rng(p.seed);
  std::normal_distribution<double> noise(0.0, p.noise_sigma > 0.0 ? p.noise_sigma : 1.0);
  const auto imu_count = static_cast<std::size_t>(grid_index(total, 1.0 / opts.imu_rate));
  imu.rows.reserve(imu_count);
  for (std::size_t k = 0; k < imu_count; ++k) {
    const double t = static_cast<double>(k) / opts.imu_rate;
    double av = yaw_rate_at(t - opts.padding - p.imu_delay);
    if (p.noise_sigma > 0.0) {
      av += noise(rng);
    }
    imu.rows.push_back({t, av});
  }
  return {std::move(joy), std::move(imu)};
}

}  // namespace ikd
