#include "app.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <initializer_list>
#include <ostream>
#include <set>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "ikd/correction.hpp"
#include "ikd/datalog.hpp"
#include "ikd/error.hpp"
#include "ikd/numfmt.hpp"
#include "ikd/plot.hpp"

namespace ikd::app {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!j.is_object()) {
    throw ValidationError(where + " must be a JSON object");
  }
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items()) {
    if (!keys.contains(key)) {
      throw ValidationError("unknown key '" + key + "' in " + where);
    }
  }
}

template <typename T>
void take(const json& j, const char* key, T& dst) {
  if (j.contains(key)) {
    dst = j.at(key).get<T>();
  }
}

fs::path existing_file(const json& j, const fs::path& base, const std::string& what) {
  fs::path p = j.get<std::string>();
  if (p.is_relative() && !base.empty()) {
    p = base / p;
  }
  if (!fs::is_regular_file(p)) {
    throw IoError(what + " not found: " + p.string());
  }
  return p;
}

void read_teleop(const json& j, TeleopOptions& o) {
  check_keys(j,
             {"duration", "speeds", "v_min", "v_max", "c_max", "curvature_exponent", "hold_min",
              "hold_max", "ramp_time", "straight_fraction", "clockwise_fraction"},
             "teleop");
  take(j, "duration", o.duration);
  take(j, "speeds", o.speeds);
  take(j, "v_min", o.v_min);
  take(j, "v_max", o.v_max);
  take(j, "c_max", o.c_max);
  take(j, "curvature_exponent", o.curvature_exponent);
  take(j, "hold_min", o.hold_min);
  take(j, "hold_max", o.hold_max);
  take(j, "ramp_time", o.ramp_time);
  take(j, "straight_fraction", o.straight_fraction);
  take(j, "clockwise_fraction", o.clockwise_fraction);
}

void read_drift(const json& j, DriftOptions& o) {
  check_keys(j,
             {"turbo_v", "approach_time", "turn_c", "cut_v", "turn_time", "exit_v", "exit_time",
              "direction"},
             "drift");
  take(j, "turbo_v", o.turbo_v);
  take(j, "approach_time", o.approach_time);
  take(j, "turn_c", o.turn_c);
  take(j, "cut_v", o.cut_v);
  take(j, "turn_time", o.turn_time);
  take(j, "exit_v", o.exit_v);
  take(j, "exit_time", o.exit_time);
  take(j, "direction", o.direction);
}

void read_train(const json& j, TrainConfig& t) {
  check_keys(j,
             {"lr", "schedule", "batch_size", "epochs", "weight_decay", "beta1", "beta2", "eps_adam",
              "split_fraction"},
             "train");
  take(j, "lr", t.lr);
  take(j, "batch_size", t.batch_size);
  take(j, "epochs", t.epochs);
  take(j, "weight_decay", t.weight_decay);
  take(j, "beta1", t.beta1);
  take(j, "beta2", t.beta2);
  take(j, "eps_adam", t.eps_adam);
  take(j, "split_fraction", t.split_fraction);
  if (j.contains("schedule")) {
    const auto s = j.at("schedule").get<std::string>();
    if (s == "constant") {
      t.schedule = LrSchedule::Constant;
    } else if (s == "cosine") {
      t.schedule = LrSchedule::Cosine;
    } else {
      throw ValidationError("train.schedule must be 'constant' or 'cosine', got '" + s + "'");
    }
  }
  t.validate();
}

PipelineConfig parse_config(const json& j, const fs::path& base) {
  check_keys(j,
             {"seed", "output_dir", "slip", "slip_file", "teleop", "script_file", "drift", "sensor",
              "delay_search", "dataset_rate", "prune_eps_c", "train", "circle", "replay", "scenario"},
             "config");
  PipelineConfig cfg;
  if (j.contains("slip") && j.contains("slip_file")) {
    throw ValidationError("config sets both 'slip' and 'slip_file'");
  }
  if (j.contains("slip")) {
    check_keys(j.at("slip"), {"beta", "lag_tau", "imu_delay", "noise_sigma", "seed"}, "slip");
    cfg.slip = j.at("slip").get<SlipParams>();
  }
  if (j.contains("slip_file")) {
    cfg.slip = load_slip_params(existing_file(j.at("slip_file"), base, "slip file"));
  }
  if (j.contains("output_dir")) {
    cfg.output_dir = j.at("output_dir").get<std::string>();
  }
  if (j.contains("teleop")) {
    read_teleop(j.at("teleop"), cfg.teleop);
  }
  if (j.contains("script_file")) {
    cfg.script_file = existing_file(j.at("script_file"), base, "script file");
  }
  if (j.contains("drift")) {
    read_drift(j.at("drift"), cfg.drift);
  }
  if (j.contains("sensor")) {
    const auto& s = j.at("sensor");
    check_keys(s, {"joy_rate", "imu_rate", "padding"}, "sensor");
    take(s, "joy_rate", cfg.sensor.joy_rate);
    take(s, "imu_rate", cfg.sensor.imu_rate);
    take(s, "padding", cfg.sensor.padding);
  }
  if (j.contains("delay_search")) {
    const auto& d = j.at("delay_search");
    check_keys(d, {"lo", "hi", "step", "objective_ceiling"}, "delay_search");
    take(d, "lo", cfg.delay.lo);
    take(d, "hi", cfg.delay.hi);
    take(d, "step", cfg.delay.step);
    take(d, "objective_ceiling", cfg.delay.objective_ceiling);
  }
  take(j, "dataset_rate", cfg.dataset_rate);
  take(j, "prune_eps_c", cfg.prune_eps_c);
  if (j.contains("train")) {
    read_train(j.at("train"), cfg.train);
  }
  if (j.contains("circle")) {
    const auto& c = j.at("circle");
    check_keys(c, {"v", "curvatures", "revolutions", "settle_multiple", "max_duration"}, "circle");
    take(c, "v", cfg.circle.v);
    take(c, "curvatures", cfg.circle.curvatures);
    take(c, "revolutions", cfg.circle.options.revolutions);
    take(c, "settle_multiple", cfg.circle.options.settle_multiple);
    take(c, "max_duration", cfg.circle.options.max_duration);
  }
  if (j.contains("replay")) {
    const auto& r = j.at("replay");
    check_keys(r, {"rate", "stride", "duration"}, "replay");
    take(r, "rate", cfg.replay.rate);
    take(r, "stride", cfg.replay.stride);
    take(r, "duration", cfg.replay.duration);
  }
  if (j.contains("scenario")) {
    cfg.scenario = j.at("scenario").get<std::string>();
    if (cfg.scenario != "loose" && cfg.scenario != "tight") {
      cfg.scenario = existing_file(j.at("scenario"), base, "scenario file").string();
    }
  }
  cfg.set_seed(j.value("seed", std::uint64_t{0}));
  return cfg;
}

std::string one_line(std::string s) {
  std::replace(s.begin(), s.end(), '\n', ' ');
  return s;
}

// Mutable state shared by the subcommand callbacks.
struct Context {
  std::ostream& out;
  std::ostream& err;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::string> model_path;
  std::optional<std::string> slip_path;

  PipelineConfig cfg;
  OutputLayout layout;

  void prepare() {
    cfg = config_path.empty() ? PipelineConfig{} : load_config(config_path);
    if (seed) {
      cfg.set_seed(*seed);
    }
    if (slip_path) {
      const auto s = cfg.slip.seed;
      cfg.slip = load_slip_params(*slip_path);
      cfg.slip.seed = s;
    }
    layout = resolve_layout(out_dir ? std::optional<fs::path>(*out_dir) : std::nullopt, cfg);
  }

  std::optional<MlpParams> model() const {
    if (!model_path) {
      return std::nullopt;
    }
    return load_model(fs::path(*model_path));
  }
};

ReplayOptions replay_options(const ReplayConfig& rc, const CommandBuffer& buf) {
  ReplayOptions o;
  o.rate = rc.rate;
  o.stride = rc.stride;
  o.duration = rc.duration > 0.0
                   ? rc.duration
                   : static_cast<double>(buf.size()) / (rc.rate * static_cast<double>(rc.stride));
  return o;
}

std::vector<double> trace_times(const SimTrace& t) {
  std::vector<double> x(t.states.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    x[i] = t.time_at(i);
  }
  return x;
}

void write_av_svg(const fs::path& path, const std::string& title, const SimTrace& t) {
  const auto x = trace_times(t);
  Series cmd{"commanded av", {}};
  Series achieved{"true av", {}};
  for (std::size_t i = 0; i < t.states.size(); ++i) {
    const ControlCommand c =
        t.commands.empty() ? ControlCommand{} : t.commands[std::min(i, t.commands.size() - 1)];
    cmd.y.push_back(c.angular_velocity());
    achieved.y.push_back(t.states[i].av);
  }
  const Series series[] = {cmd, achieved};
  write_series_svg(path, title, x, series);
}

void write_loss_svg(const fs::path& path, const LossCurve& curve) {
  std::vector<double> x;
  Series train_s{"train mse", {}};
  Series test_s{"test mse", {}};
  for (std::size_t e = 0; e < curve.size(); ++e) {
    x.push_back(static_cast<double>(e + 1));
    train_s.y.push_back(curve[e].train_mse);
    test_s.y.push_back(curve[e].test_mse);
  }
  const Series series[] = {train_s, test_s};
  write_series_svg(path, "loss per epoch", x, series);
}

void write_dataset_histograms(const OutputLayout& layout, const std::string& name, const AlignedDataset& d) {
  const auto hc = histogram(dataset_curvatures(d), 48, -1.2, 1.2);
  write_histogram_csv(layout.reports() / (name + "_curvature_hist.csv"), hc);
  write_histogram_svg(layout.plots() / (name + "_curvature_hist.svg"), "curvature (1/m)", hc);
  const auto hv = histogram(dataset_velocities(d), 45, 0.0, 4.5);
  write_histogram_csv(layout.reports() / (name + "_velocity_hist.csv"), hv);
  write_histogram_svg(layout.plots() / (name + "_velocity_hist.svg"), "velocity (m/s)", hv);
}

void write_json(const fs::path& path, const json& j) {
  fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  out << j.dump(2) << '\n';
}

// --- subcommands -----------------------------------------------------------

struct CollectArgs {
  std::optional<double> duration;
  std::optional<std::string> script;
  bool drift = false;
  std::string name;
};

void cmd_collect(Context& ctx, const CollectArgs& a) {
  const auto& cfg = ctx.cfg;
  if (a.duration && !(*a.duration > 0.0)) {
    throw ValidationError("collect needs a positive duration");
  }
  ControlScript script = ControlScript::constant(0.0, 0.0);
  double duration = 0.0;
  if (a.drift) {
    script = make_drift_script(cfg.drift);
    duration = a.duration.value_or(drift_script_duration(cfg.drift));
  } else if (a.script || cfg.script_file) {
    script = load_script(a.script ? fs::path(*a.script) : *cfg.script_file);
    duration = a.duration.value_or(cfg.teleop.duration);
  } else {
    TeleopOptions t = cfg.teleop;
    if (a.duration) {
      t.duration = *a.duration;
    }
    script = make_teleop_script(t, cfg.seed);
    duration = t.duration;
  }
  if (!(duration > 0.0)) {
    throw ValidationError("collect needs a positive duration");
  }
  const std::string name = a.name.empty() ? (a.drift ? "drift" : "run") : a.name;
  const auto trace = run_scenario(script, cfg.slip, duration);
  const auto [joy, imu] = emit_sensor_logs(trace, cfg.slip, cfg.sensor);
  const auto dir = ctx.layout.logs();
  write_csv(dir / (name + "_joy.csv"), joy);
  write_csv(dir / (name + "_imu.csv"), imu);
  write_buffer_txt(dir / (name + "_buffer.txt"), load_buffer(joy));
  write_trace_csv(dir / (name + "_trace.csv"), trace);
  ctx.out << "collect: " << joy.size() << " joystick rows, " << imu.size() << " IMU rows -> "
          << dir.string() << '\n';
}

struct AlignArgs {
  std::vector<std::string> joy;
  std::vector<std::string> imu;
  std::string name = "dataset";
  bool trim = false;
};

void cmd_align(Context& ctx, AlignArgs a) {
  const auto& cfg = ctx.cfg;
  if (a.joy.empty() && a.imu.empty()) {
    a.joy.push_back((ctx.layout.logs() / "run_joy.csv").string());
    a.imu.push_back((ctx.layout.logs() / "run_imu.csv").string());
  }
  if (a.joy.size() != a.imu.size()) {
    throw ValidationError("align needs the same number of --joy and --imu files");
  }
  std::vector<AlignedDataset> parts;
  json pairs = json::array();
  for (std::size_t i = 0; i < a.joy.size(); ++i) {
    JoyLog joy = read_joy_csv(fs::path(a.joy[i]));
    ImuLog imu = read_imu_csv(fs::path(a.imu[i]));
    if (a.trim) {
      std::tie(joy, imu) = trim_idle(joy, imu);
    }
    const auto curve = delay_error_curve(joy, imu, cfg.delay);
    const auto est = estimate_delay(joy, imu, cfg.delay);
    if (est.suspect) {
      ctx.err << "ikd: warning: suspect delay " << format_double(est.delay) << " s for "
              << fs::path(a.imu[i]).filename().string() << '\n';
    }
    if (i == 0) {
      auto out = std::ofstream();
      const auto csv = ctx.layout.reports() / (a.name + "_delay_curve.csv");
      fs::create_directories(csv.parent_path());
      out.open(csv, std::ios::binary);
      out << "delay,objective\n";
      std::vector<double> x;
      Series s{"mse", {}};
      for (const auto& p : curve) {
        out << format_double(p.delay) << ',' << format_double(p.objective) << '\n';
        x.push_back(p.delay);
        s.y.push_back(p.objective);
      }
      const Series series[] = {s};
      write_series_svg(ctx.layout.plots() / (a.name + "_delay_curve.svg"), "delay objective", x, series);
    }
    pairs.push_back({{"joy", fs::path(a.joy[i]).filename().string()},
                     {"imu", fs::path(a.imu[i]).filename().string()},
                     {"delay", est.delay},
                     {"objective", est.objective},
                     {"in_range", est.in_range},
                     {"suspect", est.suspect}});
    parts.push_back(build_dataset(joy, imu, est.delay, cfg.dataset_rate));
  }
  const auto merged = merge_datasets(parts);
  const auto pruned = prune_zero_curvature(merged, cfg.prune_eps_c);
  write_dataset_csv(ctx.layout.datasets() / (a.name + ".csv"), pruned);
  write_dataset_histograms(ctx.layout, a.name, pruned);
  write_json(ctx.layout.reports() / (a.name + "_delay.json"),
             {{"pairs", pairs}, {"rows_aligned", merged.size()}, {"rows_kept", pruned.size()}});
  ctx.out << "align: " << pruned.size() << " rows (" << merged.size() - pruned.size()
          << " zero-curvature rows pruned), delay " << format_double(pairs[0]["delay"].get<double>())
          << " s\n";
}

struct TrainArgs {
  std::optional<std::string> dataset;
  std::string name = "model";
  std::optional<std::size_t> epochs;
};

void cmd_train(Context& ctx, const TrainArgs& a) {
  const fs::path path = a.dataset ? fs::path(*a.dataset) : ctx.layout.datasets() / "dataset.csv";
  const auto data = read_dataset_csv(path, 1.0 / ctx.cfg.dataset_rate);
  TrainConfig tc = ctx.cfg.train;
  if (a.epochs) {
    tc.epochs = *a.epochs;
  }
  const auto result = train(data, tc);
  save_model(ctx.layout.models() / (a.name + ".json"), result.params);
  write_loss_csv(ctx.layout.reports() / (a.name + "_loss.csv"), result.curve);
  write_loss_svg(ctx.layout.plots() / (a.name + "_loss.svg"), result.curve);
  ctx.out << "train: " << tc.epochs << " epochs, final train mse "
          << format_double(result.curve.back().train_mse) << ", test mse "
          << format_double(result.curve.back().test_mse) << '\n';
}

struct CorrectArgs {
  double v = 0.0;
  double c = 0.0;
};

void cmd_correct(Context& ctx, const CorrectArgs& a) {
  const auto model = ctx.model();
  if (!model) {
    throw ValidationError("correct needs --model");
  }
  const json j = correct(*model, a.v, a.c);
  ctx.out << j.dump() << '\n';
}

struct ReplayArgs {
  std::string buffer;
  std::optional<double> duration;
  std::optional<std::size_t> stride;
  std::optional<double> rate;
  std::string name = "replay";
};

void cmd_replay(Context& ctx, const ReplayArgs& a) {
  CommandBuffer buf = read_buffer_txt(a.buffer);
  ReplayConfig rc = ctx.cfg.replay;
  if (a.duration) {
    rc.duration = *a.duration;
  }
  if (a.stride) {
    rc.stride = *a.stride;
  }
  if (a.rate) {
    rc.rate = *a.rate;
  }
  const auto model = ctx.model();
  const auto trace = execute_replay(buf, ctx.cfg.slip, model, replay_options(rc, buf));
  write_trace_csv(ctx.layout.reports() / (a.name + "_trace.csv"), trace);
  const LabeledTrace lt[] = {{a.name, &trace}};
  write_trajectory_svg(ctx.layout.plots() / (a.name + "_trajectory.svg"), lt);
  write_av_svg(ctx.layout.plots() / (a.name + "_av.svg"), "angular velocity", trace);
  const auto r = drift_eval(trace, DriftScenario{});
  ctx.out << "replay: " << trace.commands.size() << " sim steps, ikd "
          << (model ? "on" : "off") << ", min turn radius " << format_double(r.min_turn_radius) << " m\n";
}

struct CircleArgs {
  std::optional<double> v;
  std::vector<double> curvatures;
};

void cmd_eval_circle(Context& ctx, const CircleArgs& a) {
  const double v = a.v.value_or(ctx.cfg.circle.v);
  const auto cs = a.curvatures.empty() ? ctx.cfg.circle.curvatures : a.curvatures;
  for (double c : cs) {
    if (c == 0.0 || !std::isfinite(c)) {
      throw ValidationError("circle test needs a non-zero curvature");
    }
  }
  const auto model = ctx.model();
  std::vector<CircleReport> reports;
  for (double c : cs) {
    reports.push_back(circle_test(v, c, ctx.cfg.slip, std::nullopt, ctx.cfg.circle.options));
    if (model) {
      reports.push_back(circle_test(v, c, ctx.cfg.slip, model, ctx.cfg.circle.options));
    }
  }
  write_circle_reports_csv(ctx.layout.reports() / "circle_reports.csv", reports);
  if (model) {
    const auto rows = pair_circle_reports(reports);
    write_circle_table_csv(ctx.layout.reports() / "circle_table.csv", rows);
  }
  for (const auto& r : reports) {
    ctx.out << "circle: c " << format_double(r.c_commanded) << (r.ikd_enabled ? " ikd " : " raw ")
            << "measured " << format_double(r.c_measured) << " deviation "
            << format_double(r.deviation_pct) << "%\n";
  }
}

struct DriftArgs {
  std::optional<std::string> buffer;
  std::optional<std::string> scenario;
};

void cmd_eval_drift(Context& ctx, const DriftArgs& a) {
  const auto& cfg = ctx.cfg;
  const std::string scenario_name = a.scenario.value_or(cfg.scenario);
  const DriftScenario scenario = resolve_scenario(scenario_name);
  CommandBuffer buf = [&] {
    if (a.buffer) {
      return read_buffer_txt(*a.buffer);
    }
    const auto trace = run_scenario(make_drift_script(cfg.drift), cfg.slip, drift_script_duration(cfg.drift));
    return load_buffer(emit_sensor_logs(trace, cfg.slip, cfg.sensor).first);
  }();
  const auto opts = replay_options(cfg.replay, buf);
  const auto model = ctx.model();

  std::vector<std::pair<std::string, SimTrace>> runs;
  runs.emplace_back("uncorrected", execute_replay(buf, cfg.slip, std::nullopt, opts));
  if (model) {
    buf.rewind();
    runs.emplace_back("ikd", execute_replay(buf, cfg.slip, model, opts));
  }
  std::vector<LabeledClearance> rows;
  std::vector<LabeledTrace> traces;
  for (const auto& [label, trace] : runs) {
    rows.push_back({label, drift_eval(trace, scenario)});
    traces.push_back({label, &trace});
    write_trace_csv(ctx.layout.reports() / ("drift_" + scenario.name + "_" + label + "_trace.csv"), trace);
  }
  write_clearance_csv(ctx.layout.reports() / ("drift_" + scenario.name + ".csv"), rows);
  write_trajectory_svg(ctx.layout.plots() / ("drift_" + scenario.name + ".svg"), traces, &scenario);
  for (const auto& r : rows) {
    ctx.out << "drift " << scenario.name << ": " << r.label << " min turn radius "
            << format_double(r.report.min_turn_radius) << " m, clearance "
            << format_double(r.report.min_clearance) << " m, "
            << (r.report.collided ? "collided" : (r.report.cleared_gate ? "cleared gate" : "missed gate"))
            << '\n';
  }
}

struct PlotArgs {
  std::vector<std::string> traces;
  std::optional<std::string> dataset;
  std::optional<std::string> loss;
  std::optional<std::string> scenario;
  std::string name = "plot";
};

LossCurve read_loss_csv(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  LossCurve curve;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    if (++line_no == 1) {
      continue;
    }
    const auto a = line.find(',');
    const auto b = line.find(',', a == std::string::npos ? a : a + 1);
    EpochLoss e;
    if (a == std::string::npos || b == std::string::npos ||
        !parse_double(std::string_view(line).substr(a + 1, b - a - 1), e.train_mse) ||
        !parse_double(std::string_view(line).substr(b + 1), e.test_mse)) {
      throw ParseError(path.string() + ": expected epoch,train_mse,test_mse", line_no);
    }
    curve.push_back(e);
  }
  return curve;
}

void cmd_plot(Context& ctx, const PlotArgs& a) {
  if (a.traces.empty() && !a.dataset && !a.loss) {
    throw ValidationError("plot needs --trace, --dataset or --loss");
  }
  std::size_t written = 0;
  if (!a.traces.empty()) {
    std::vector<SimTrace> loaded;
    loaded.reserve(a.traces.size());
    for (const auto& t : a.traces) {
      loaded.push_back(read_trace_csv(t));
    }
    std::vector<LabeledTrace> labeled;
    for (std::size_t i = 0; i < loaded.size(); ++i) {
      labeled.push_back({fs::path(a.traces[i]).stem().string(), &loaded[i]});
    }
    std::optional<DriftScenario> scenario;
    if (a.scenario) {
      scenario = resolve_scenario(*a.scenario);
    }
    write_trajectory_svg(ctx.layout.plots() / (a.name + "_trajectory.svg"), labeled,
                         scenario ? &*scenario : nullptr);
    write_av_svg(ctx.layout.plots() / (a.name + "_av.svg"), "angular velocity", loaded.front());
    written += 2;
  }
  if (a.dataset) {
    write_dataset_histograms(ctx.layout, a.name, read_dataset_csv(fs::path(*a.dataset)));
    written += 2;
  }
  if (a.loss) {
    write_loss_svg(ctx.layout.plots() / (a.name + "_loss.svg"), read_loss_csv(*a.loss));
    written += 1;
  }
  ctx.out << "plot: " << written << " figures -> " << ctx.layout.plots().string() << '\n';
}

}  // namespace

void PipelineConfig::set_seed(std::uint64_t s) {
  seed = s;
  slip.seed = s;
  train.seed = s;
}

PipelineConfig config_from_json(const json& j, const fs::path& base_dir) {
  try {
    return parse_config(j, base_dir);
  } catch (const json::exception& e) {
    throw ParseError(std::string("config: ") + e.what());
  }
}

PipelineConfig load_config(const fs::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open config " + path.string());
  }
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
  return config_from_json(j, path.parent_path());
}

OutputLayout resolve_layout(const std::optional<fs::path>& flag, const PipelineConfig& cfg) {
  if (flag) {
    return {*flag};
  }
  if (!cfg.output_dir.empty()) {
    return {cfg.output_dir};
  }
  if (const char* env = std::getenv("IKD_OUT_DIR"); env != nullptr && *env != '\0') {
    return {fs::path(env)};
  }
  return {fs::path("ikd_out")};
}

DriftScenario resolve_scenario(const std::string& name_or_path) {
  if (name_or_path == "loose") {
    return loose_drift_scenario();
  }
  if (name_or_path == "tight") {
    return tight_drift_scenario();
  }
  return load_scenario(name_or_path);
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Inverse kinodynamic workbench: simulate, align, train, correct, replay, evaluate."};
  app.name("ikd");
  app.require_subcommand(1);
  app.fallthrough();

  Context ctx{out, err, {}, {}, {}, {}, {}, {}, {}};
  app.add_option("--config", ctx.config_path, "Pipeline config JSON")->check(CLI::ExistingFile);
  app.add_option("--seed", ctx.seed, "Override the config seed");
  app.add_option("--out", ctx.out_dir, "Output root (default: config output_dir, $IKD_OUT_DIR, ./ikd_out)");
  app.add_option("--model", ctx.model_path, "Model JSON enabling the correction path")
      ->check(CLI::ExistingFile);
  app.add_option("--slip", ctx.slip_path, "Slip parameter JSON overriding the config")
      ->check(CLI::ExistingFile);

  CollectArgs collect;
  auto* c_collect = app.add_subcommand("collect", "Simulate a scripted drive and write sensor logs");
  c_collect->add_option("--duration", collect.duration, "Drive length in seconds");
  c_collect->add_option("--script", collect.script, "Control script JSON")->check(CLI::ExistingFile);
  c_collect->add_flag("--drift", collect.drift, "Use the drift script instead of teleoperation");
  c_collect->add_option("--name", collect.name, "Log name prefix (default run, or drift)");

  AlignArgs align;
  auto* c_align = app.add_subcommand("align", "Estimate IMU delay and build the training dataset");
  c_align->add_option("--joy", align.joy, "Joystick CSV (repeatable, paired with --imu)")
      ->check(CLI::ExistingFile);
  c_align->add_option("--imu", align.imu, "IMU CSV (repeatable)")->check(CLI::ExistingFile);
  c_align->add_option("--name", align.name, "Dataset name");
  c_align->add_flag("--trim", align.trim, "Drop idle joystick rows at both ends first");

  TrainArgs tr;
  auto* c_train = app.add_subcommand("train", "Train the correction network");
  c_train->add_option("--dataset", tr.dataset, "Dataset CSV")->check(CLI::ExistingFile);
  c_train->add_option("--name", tr.name, "Model name");
  c_train->add_option("--epochs", tr.epochs, "Override the config epoch count");

  CorrectArgs corr;
  auto* c_correct = app.add_subcommand("correct", "Correct one (v, c) command and print JSON");
  c_correct->add_option("--v", corr.v, "Commanded speed, m/s")->required();
  c_correct->add_option("--c", corr.c, "Desired curvature, 1/m")->required();

  ReplayArgs rp;
  auto* c_replay = app.add_subcommand("replay", "Replay a command buffer through the simulator");
  c_replay->add_option("--buffer", rp.buffer, "Buffer text file (v,av per line)")
      ->required()
      ->check(CLI::ExistingFile);
  c_replay->add_option("--duration", rp.duration, "Seconds (default one pass)");
  c_replay->add_option("--stride", rp.stride, "Buffer elements consumed per tick");
  c_replay->add_option("--rate", rp.rate, "Tick rate, Hz");
  c_replay->add_option("--name", rp.name, "Output name");

  CircleArgs ci;
  auto* c_circle = app.add_subcommand("eval-circle", "Circle tests with and without correction");
  c_circle->add_option("--v", ci.v, "Commanded speed, m/s");
  c_circle->add_option("--c", ci.curvatures, "Commanded curvature (repeatable)");

  DriftArgs dr;
  auto* c_drift = app.add_subcommand("eval-drift", "Replay a drift buffer against a gate scenario");
  c_drift->add_option("--buffer", dr.buffer, "Drift buffer (default: simulate the drift script)")
      ->check(CLI::ExistingFile);
  c_drift->add_option("--scenario", dr.scenario, "loose, tight or a scenario JSON path");

  PlotArgs pl;
  auto* c_plot = app.add_subcommand("plot", "Render SVG figures from saved traces, datasets, losses");
  c_plot->add_option("--trace", pl.traces, "Trace CSV (repeatable)")->check(CLI::ExistingFile);
  c_plot->add_option("--dataset", pl.dataset, "Dataset CSV")->check(CLI::ExistingFile);
  c_plot->add_option("--loss", pl.loss, "Loss CSV")->check(CLI::ExistingFile);
  c_plot->add_option("--scenario", pl.scenario, "Overlay loose, tight or a scenario JSON");
  c_plot->add_option("--name", pl.name, "Output name prefix");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) {
      return app.exit(e, out, err);
    }
    err << "ikd: " << one_line(e.what()) << '\n';
    return 2;
  }

  try {
    ctx.prepare();
    if (*c_collect) {
      cmd_collect(ctx, collect);
    } else if (*c_align) {
      cmd_align(ctx, align);
    } else if (*c_train) {
      cmd_train(ctx, tr);
    } else if (*c_correct) {
      cmd_correct(ctx, corr);
    } else if (*c_replay) {
      cmd_replay(ctx, rp);
    } else if (*c_circle) {
      cmd_eval_circle(ctx, ci);
    } else if (*c_drift) {
      cmd_eval_drift(ctx, dr);
    } else if (*c_plot) {
      cmd_plot(ctx, pl);
    }
  } catch (const std::exception& e) {
    err << "ikd: error: " << one_line(e.what()) << '\n';
    return 1;
  }
  return 0;
}

}  // namespace ikd::app
