#pragma once

// Planar kinodynamic car with a speed-dependent understeer law.
//
// Each integration step:
//   1. the command is saturated: |v| <= kSpeedCap, |v*c| <= kMaxAngularVelocity
//   2. speed and commanded yaw rate pass through a first-order lag (lag_tau)
//   3. the achieved yaw rate is attenuated by slip
//          av_true = av_lag / (1 + beta * v^2 * |av_lag|)
//   4. the pose advances by unicycle kinematics (explicit Euler)
//
// With all SlipParams zero the car executes exactly the commanded curvature.

#include <cstdint>
#include <utility>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "ikd/datalog.hpp"
#include "ikd/script.hpp"

namespace ikd {

/// Joystick speed ceiling observed in the recorded training data (m/s).
inline constexpr double kSpeedCap = 4.219;
/// Largest yaw rate the drive loop will command (rad/s).
inline constexpr double kMaxAngularVelocity = 4.0;
inline constexpr double kDefaultSimDt = 0.005;

struct VehicleState {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;  ///< (-pi, pi]
  double v = 0.0;        ///< body speed, m/s
  double av = 0.0;       ///< achieved yaw rate, rad/s
  double av_lag = 0.0;   ///< lagged commanded yaw rate (actuator state), rad/s

  friend bool operator==(const VehicleState&, const VehicleState&) = default;
};

struct SlipParams {
  double beta = 0.02;
  double lag_tau = 0.1;
  double imu_delay = 0.176;
  double noise_sigma = 0.01;
  std::uint64_t seed = 0;

  /// Slip-free, lag-free, delay-free, noise-free car.
  static SlipParams ideal() { return SlipParams{0.0, 0.0, 0.0, 0.0, 0}; }

  void validate() const;
  friend bool operator==(const SlipParams&, const SlipParams&) = default;
};

void to_json(nlohmann::json& j, const SlipParams& p);
void from_json(const nlohmann::json& j, SlipParams& p);
SlipParams load_slip_params(const std::filesystem::path& path);

struct SimTrace {
  double dt = kDefaultSimDt;
  std::vector<VehicleState> states;      ///< states[i] at t = i*dt
  std::vector<ControlCommand> commands;  ///< commands[i] applied over [i*dt, (i+1)*dt)

  double time_at(std::size_t i) const noexcept { return static_cast<double>(i) * dt; }
  double duration() const noexcept { return static_cast<double>(commands.size()) * dt; }
};

/// Command after actuator saturation; `c` is rescaled when the yaw rate clips.
ControlCommand saturate(const ControlCommand& cmd);

double normalize_angle(double angle);

VehicleState step_dynamics(const VehicleState& state, const ControlCommand& cmd,
                           const SlipParams& p, double dt);

/// Runs floor(duration/dt) steps from `initial`.
SimTrace run_scenario(const ControlScript& script, const SlipParams& p, double duration,
                      double dt = kDefaultSimDt, const VehicleState& initial = {});

struct SensorOptions {
  double joy_rate = 40.0;
  double imu_rate = 40.0;
  /// Idle recording before and after the drive, seconds.
  double padding = 1.0;
};

/// Samples the joystick (saturated command) and a delayed, noisy IMU yaw
/// rate. Log time 0 is the start of the leading padding.
std::pair<JoyLog, ImuLog> emit_sensor_logs(const SimTrace& trace, const SlipParams& p,
                                           const SensorOptions& opts = {});

}  // namespace ikd
