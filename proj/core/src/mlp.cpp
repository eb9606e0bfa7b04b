#include "ikd/mlp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <numeric>
#include <random>
#include <string>

#include <nlohmann/json.hpp>

#include "ikd/error.hpp"
#include "ikd/numfmt.hpp"

namespace ikd {
namespace {

constexpr std::array<std::size_t, 4> kLayerSizes{kInputDim, kHiddenDim, kHiddenDim, 1};

struct Activations {
  std::array<double, kHiddenDim> z1;
  std::array<double, kHiddenDim> h1;
  std::array<double, kHiddenDim> z2;
  std::array<double, kHiddenDim> h2;
  double y;
};

Activations run(const MlpParams& p, double v, double av) {
  Activations a{};
  for (std::size_t i = 0; i < kHiddenDim; ++i) {
    a.z1[i] = p.w1[i * kInputDim] * v + p.w1[i * kInputDim + 1] * av + p.b1[i];
    a.h1[i] = a.z1[i] > 0.0 ? a.z1[i] : 0.0;
  }
  for (std::size_t i = 0; i < kHiddenDim; ++i) {
    double s = p.b2[i];
    const double* row = &p.w2[i * kHiddenDim];
    for (std::size_t j = 0; j < kHiddenDim; ++j) {
      s += row[j] * a.h1[j];
    }
    a.z2[i] = s;
    a.h2[i] = s > 0.0 ? s : 0.0;
  }
  double y = p.b3[0];
  for (std::size_t i = 0; i < kHiddenDim; ++i) {
    y += p.w3[i] * a.h2[i];
  }
  a.y = y;
  return a;
}

}  // namespace

std::array<TensorView, 6> tensors(MlpParams& p) {
  return {{{"W1", kHiddenDim, kInputDim, p.w1},
           {"b1", kHiddenDim, 1, p.b1},
           {"W2", kHiddenDim, kHiddenDim, p.w2},
           {"b2", kHiddenDim, 1, p.b2},
           {"W3", 1, kHiddenDim, p.w3},
           {"b3", 1, 1, p.b3}}};
}

std::array<ConstTensorView, 6> tensors(const MlpParams& p) {
  return {{{"W1", kHiddenDim, kInputDim, p.w1},
           {"b1", kHiddenDim, 1, p.b1},
           {"W2", kHiddenDim, kHiddenDim, p.w2},
           {"b2", kHiddenDim, 1, p.b2},
           {"W3", 1, kHiddenDim, p.w3},
           {"b3", 1, 1, p.b3}}};
}

MlpParams init_params(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  MlpParams p;
  auto fill = [&](std::span<double> values, std::size_t fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (auto& x : values) {
      x = dist(rng);
    }
  };
  fill(p.w1, kInputDim);
  fill(p.b1, kInputDim);
  fill(p.w2, kHiddenDim);
  fill(p.b2, kHiddenDim);
  fill(p.w3, kHiddenDim);
  fill(p.b3, kHiddenDim);
  return p;
}

MlpParams identity_params() {
  MlpParams p;
  p.w1[0 * kInputDim + 1] = 1.0;
  p.w1[1 * kInputDim + 1] = -1.0;
  p.w2[0 * kHiddenDim + 0] = 1.0;
  p.w2[1 * kHiddenDim + 1] = 1.0;
  p.w3[0] = 1.0;
  p.w3[1] = -1.0;
  return p;
}

double forward(const MlpParams& p, double v, double av) { return run(p, v, av).y; }

std::vector<TrainingSample> to_samples(const AlignedDataset& d) {
  std::vector<TrainingSample> out;
  out.reserve(d.size());
  for (const auto& r : d.rows) {
    out.push_back({r.v_joy, r.av_imu, r.av_joy});
  }
  return out;
}

LossAndGrads loss_and_grads(const MlpParams& p, std::span<const TrainingSample> batch) {
  if (batch.empty()) {
    throw ValidationError("loss_and_grads needs a non-empty batch");
  }
  LossAndGrads out;
  auto& g = out.grads;
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  double loss = 0.0;
  for (const auto& s : batch) {
    const Activations a = run(p, s.v, s.av_imu);
    const double err = a.y - s.target;
    loss += err * err;
    const double dy = 2.0 * err * inv_n;

    g.b3[0] += dy;
    std::array<double, kHiddenDim> dz2{};
    for (std::size_t i = 0; i < kHiddenDim; ++i) {
      g.w3[i] += dy * a.h2[i];
      dz2[i] = a.z2[i] > 0.0 ? dy * p.w3[i] : 0.0;
    }
    std::array<double, kHiddenDim> dh1{};
    for (std::size_t i = 0; i < kHiddenDim; ++i) {
      if (dz2[i] == 0.0) {
        continue;
      }
      g.b2[i] += dz2[i];
      double* grow = &g.w2[i * kHiddenDim];
      const double* wrow = &p.w2[i * kHiddenDim];
      for (std::size_t j = 0; j < kHiddenDim; ++j) {
        grow[j] += dz2[i] * a.h1[j];
        dh1[j] += wrow[j] * dz2[i];
      }
    }
    for (std::size_t j = 0; j < kHiddenDim; ++j) {
      if (!(a.z1[j] > 0.0)) {
        continue;
      }
      g.b1[j] += dh1[j];
      g.w1[j * kInputDim] += dh1[j] * s.v;
      g.w1[j * kInputDim + 1] += dh1[j] * s.av_imu;
    }
  }
  out.mse = loss * inv_n;
  return out;
}

double mse(const MlpParams& p, std::span<const TrainingSample> samples) {
  if (samples.empty()) {
    return 0.0;
  }
  double sum = 0.0;
  for (const auto& s : samples) {
    const double e = forward(p, s.v, s.av_imu) - s.target;
    sum += e * e;
  }
  return sum / static_cast<double>(samples.size());
}

void adamw_step(MlpParams& p, const MlpGrads& grads, AdamState& state, const AdamConfig& cfg) {
  state.t += 1;
  const double t = static_cast<double>(state.t);
  const double bc1 = 1.0 - std::pow(cfg.beta1, t);
  const double bc2 = 1.0 - std::pow(cfg.beta2, t);
  const double decay = 1.0 - cfg.lr * cfg.weight_decay;

  auto m = tensors(state.m);
  auto v = tensors(state.v);
  auto w = tensors(p);
  auto g = tensors(grads);
  for (std::size_t k = 0; k < w.size(); ++k) {
    for (std::size_t i = 0; i < w[k].data.size(); ++i) {
      const double gi = g[k].data[i];
      double& mi = m[k].data[i];
      double& vi = v[k].data[i];
      mi = cfg.beta1 * mi + (1.0 - cfg.beta1) * gi;
      vi = cfg.beta2 * vi + (1.0 - cfg.beta2) * gi * gi;
      const double m_hat = mi / bc1;
      const double v_hat = vi / bc2;
      double& wi = w[k].data[i];
      wi *= decay;
      wi -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
    }
  }
}

void TrainConfig::validate() const {
  if (batch_size < 1 || epochs < 1) {
    throw ValidationError("train config needs batch_size >= 1 and epochs >= 1");
  }
  if (!(split_fraction > 0.0 && split_fraction < 1.0)) {
    throw ValidationError("split_fraction must lie strictly between 0 and 1");
  }
  if (!(lr > 0.0) || weight_decay < 0.0 || !(beta1 >= 0.0 && beta1 < 1.0) ||
      !(beta2 >= 0.0 && beta2 < 1.0) || !(eps_adam > 0.0)) {
    throw ValidationError("invalid optimizer settings");
  }
}

TrainResult train(const AlignedDataset& data, const TrainConfig& cfg) {
  cfg.validate();
  if (data.size() < 2 * cfg.batch_size) {
    throw ValidationError("dataset has " + std::to_string(data.size()) + " rows; training needs at least " +
                          std::to_string(2 * cfg.batch_size));
  }
  const auto samples = to_samples(data);
  const std::size_t n = samples.size();

  std::mt19937_64 rng(cfg.seed ^ 0x9e3779b97f4a7c15ULL);
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::shuffle(order.begin(), order.end(), rng);

  auto n_train = static_cast<std::size_t>(std::llround(static_cast<double>(n) * cfg.split_fraction));
  n_train = std::clamp<std::size_t>(n_train, 1, n - 1);
  std::vector<TrainingSample> train_set;
  std::vector<TrainingSample> test_set;
  train_set.reserve(n_train);
  test_set.reserve(n - n_train);
  for (std::size_t i = 0; i < n; ++i) {
    (i < n_train ? train_set : test_set).push_back(samples[order[i]]);
  }

  TrainResult result;
  result.params = init_params(cfg.seed);
  result.initial = {mse(result.params, train_set), mse(result.params, test_set)};
  AdamState state;
  AdamConfig adam = cfg.adam();
  const std::size_t batches_per_epoch = (train_set.size() + cfg.batch_size - 1) / cfg.batch_size;
  const double total_steps = static_cast<double>(batches_per_epoch * cfg.epochs);

  std::vector<std::size_t> perm(train_set.size());
  std::iota(perm.begin(), perm.end(), std::size_t{0});
  std::vector<TrainingSample> batch;
  batch.reserve(cfg.batch_size);
  for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
    std::shuffle(perm.begin(), perm.end(), rng);
    for (std::size_t start = 0; start < perm.size(); start += cfg.batch_size) {
      const std::size_t end = std::min(start + cfg.batch_size, perm.size());
      batch.clear();
      for (std::size_t i = start; i < end; ++i) {
        batch.push_back(train_set[perm[i]]);
      }
      const auto lg = loss_and_grads(result.params, batch);
      if (cfg.schedule == LrSchedule::Cosine) {
        const double progress = static_cast<double>(state.t) / total_steps;
        adam.lr = 0.5 * cfg.lr * (1.0 + std::cos(std::numbers::pi * progress));
      }
      adamw_step(result.params, lg.grads, state, adam);
    }
    result.curve.push_back({mse(result.params, train_set), mse(result.params, test_set)});
  }
  return result;
}

void save_model(std::ostream& out, const MlpParams& p) {
  nlohmann::json j;
  j["format"] = "ikd-mlp";
  j["version"] = kModelFileVersion;
  j["activation"] = "relu";
  j["layer_sizes"] = kLayerSizes;
  auto& ts = j["tensors"];
  for (const auto& t : tensors(p)) {
    ts[std::string(t.name)] = {{"shape", {t.rows, t.cols}},
                               {"data", std::vector<double>(t.data.begin(), t.data.end())}};
  }
  out << j.dump(1) << '\n';
}

void save_model(const std::filesystem::path& path, const MlpParams& p) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write model " + path.string());
  }
  save_model(out, p);
}

MlpParams load_model(std::istream& in) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(std::string("model file is not valid JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("version") || !j["version"].is_number_integer()) {
    throw ParseError("model file lacks an integer 'version'");
  }
  if (j["version"].get<int>() != kModelFileVersion) {
    throw VersionError("model file version " + std::to_string(j["version"].get<int>()) +
                       " is not supported (expected " + std::to_string(kModelFileVersion) + ")");
  }
  if (!j.contains("layer_sizes") || j["layer_sizes"] != nlohmann::json(kLayerSizes)) {
    throw ShapeError("model layer_sizes must be [2,32,32,1]");
  }
  if (!j.contains("tensors") || !j["tensors"].is_object()) {
    throw ParseError("model file lacks a 'tensors' object");
  }
  MlpParams p;
  for (auto& t : tensors(p)) {
    const std::string name(t.name);
    const auto& ts = j["tensors"];
    if (!ts.contains(name)) {
      throw ShapeError("model file is missing tensor " + name);
    }
    const auto& entry = ts[name];
    const auto& shape = entry.at("shape");
    const auto& data = entry.at("data");
    if (!shape.is_array() || shape.size() != 2 || !data.is_array()) {
      throw ParseError("tensor " + name + " needs a 2-element shape and a data array");
    }
    const auto rows = shape[0].get<std::size_t>();
    const auto cols = shape[1].get<std::size_t>();
    if (rows != t.rows || cols != t.cols) {
      throw ShapeError("tensor " + name + " has shape " + std::to_string(rows) + "x" +
                       std::to_string(cols) + ", expected " + std::to_string(t.rows) + "x" +
                       std::to_string(t.cols));
    }
    if (data.size() != t.data.size()) {
      throw ShapeError("tensor " + name + " holds " + std::to_string(data.size()) +
                       " values, expected " + std::to_string(t.data.size()));
    }
    for (std::size_t i = 0; i < data.size(); ++i) {
      if (!data[i].is_number()) {
        throw ParseError("tensor " + name + " has a non-numeric entry at " + std::to_string(i));
      }
      t.data[i] = data[i].get<double>();
    }
  }
  return p;
}

MlpParams load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open model " + path.string());
  }
  try {
    return load_model(in);
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

void write_loss_csv(const std::filesystem::path& path, const LossCurve& curve) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  out << "epoch,train_mse,test_mse\n";
  for (std::size_t i = 0; i < curve.size(); ++i) {
    out << (i + 1) << ',' << format_double(curve[i].train_mse) << ','
        << format_double(curve[i].test_mse) << '\n';
  }
}

}  // namespace ikd
