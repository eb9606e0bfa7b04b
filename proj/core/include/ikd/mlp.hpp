#pragma once

// Inverse-model network: (v_joy, av_imu) -> av_joy.
//
//   h1 = relu(W1 x + b1)     W1: 32x2
//   h2 = relu(W2 h1 + b2)    W2: 32x32
//   y  = W3 h2 + b3          W3: 1x32, linear head
//
// Everything is double precision. Inputs are fed raw, without normalization.

#include <array>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string_view>
#include <vector>

#include "ikd/align.hpp"

namespace ikd {

inline constexpr std::size_t kInputDim = 2;
inline constexpr std::size_t kHiddenDim = 32;
inline constexpr int kModelFileVersion = 1;

/// Weights are row-major: w1[r * kInputDim + c], w2[r * kHiddenDim + c].
struct MlpParams {
  std::array<double, kHiddenDim * kInputDim> w1{};
  std::array<double, kHiddenDim> b1{};
  std::array<double, kHiddenDim * kHiddenDim> w2{};
  std::array<double, kHiddenDim> b2{};
  std::array<double, kHiddenDim> w3{};
  std::array<double, 1> b3{};

  static constexpr std::size_t kParameterCount =
      kHiddenDim * kInputDim + kHiddenDim + kHiddenDim * kHiddenDim + kHiddenDim + kHiddenDim + 1;

  friend bool operator==(const MlpParams&, const MlpParams&) = default;
};

/// Gradients share the parameter layout.
using MlpGrads = MlpParams;

struct TensorView {
  std::string_view name;
  std::size_t rows;
  std::size_t cols;
  std::span<double> data;
};

struct ConstTensorView {
  std::string_view name;
  std::size_t rows;
  std::size_t cols;
  std::span<const double> data;
};

/// W1, b1, W2, b2, W3, b3 in that order.
std::array<TensorView, 6> tensors(MlpParams& p);
std::array<ConstTensorView, 6> tensors(const MlpParams& p);

/// Uniform in +-1/sqrt(fan_in) per layer.
MlpParams init_params(std::uint64_t seed);

/// Network whose output equals its av input exactly: relu(a) - relu(-a).
MlpParams identity_params();

double forward(const MlpParams& p, double v, double av);

struct TrainingSample {
  double v = 0.0;       ///< joystick velocity (input)
  double av_imu = 0.0;  ///< observed yaw rate (input)
  double target = 0.0;  ///< joystick yaw rate
};

std::vector<TrainingSample> to_samples(const AlignedDataset& d);

struct LossAndGrads {
  double mse = 0.0;
  MlpGrads grads;
};

/// Mean squared error over the batch and its exact gradient. Batch must be non-empty.
LossAndGrads loss_and_grads(const MlpParams& p, std::span<const TrainingSample> batch);

double mse(const MlpParams& p, std::span<const TrainingSample> samples);

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  double weight_decay = 0.01;
};

struct AdamState {
  MlpParams m;
  MlpParams v;
  std::int64_t t = 0;

  friend bool operator==(const AdamState&, const AdamState&) = default;
};

/// One AdamW update with decoupled weight decay and bias correction.
void adamw_step(MlpParams& p, const MlpGrads& grads, AdamState& state, const AdamConfig& cfg);

enum class LrSchedule {
  Constant,
  Cosine,  ///< anneals lr to zero over the whole run
};

struct TrainConfig {
  double lr = 1e-3;
  LrSchedule schedule = LrSchedule::Constant;
  std::size_t batch_size = 32;
  std::size_t epochs = 50;
  double weight_decay = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps_adam = 1e-8;
  std::uint64_t seed = 0;
  double split_fraction = 0.9;  ///< share of rows used for training

  AdamConfig adam() const { return {lr, beta1, beta2, eps_adam, weight_decay}; }
  void validate() const;
};

struct EpochLoss {
  double train_mse = 0.0;
  double test_mse = 0.0;

  friend bool operator==(const EpochLoss&, const EpochLoss&) = default;
};

using LossCurve = std::vector<EpochLoss>;

struct TrainResult {
  MlpParams params;
  LossCurve curve;
  /// Full-pass train/test MSE of the freshly initialized network.
  EpochLoss initial;
};

/// Seeded split, per-epoch reshuffle, mini-batch AdamW. Needs at least
/// 2 * batch_size rows.
TrainResult train(const AlignedDataset& data, const TrainConfig& cfg);

/// Versioned JSON weight dump; doubles round-trip exactly.
void save_model(std::ostream& out, const MlpParams& p);
void save_model(const std::filesystem::path& path, const MlpParams& p);
/// ParseError on malformed JSON, VersionError / ShapeError on mismatches.
MlpParams load_model(std::istream& in);
MlpParams load_model(const std::filesystem::path& path);

/// CSV: epoch,train_mse,test_mse (epochs counted from 1).
void write_loss_csv(const std::filesystem::path& path, const LossCurve& curve);

}  // namespace ikd
