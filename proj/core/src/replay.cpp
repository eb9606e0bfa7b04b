#include "ikd/replay.hpp"

#include <cmath>
#include <fstream>
#include <string>
#include <string_view>

#include "ikd/correction.hpp"
#include "ikd/error.hpp"
#include "ikd/numfmt.hpp"

namespace ikd {

CommandBuffer::CommandBuffer(std::vector<BufferedCommand> commands) : commands_(std::move(commands)) {
  if (commands_.empty()) {
    throw ValidationError("command buffer must not be empty");
  }
  for (const auto& c : commands_) {
    if (!std::isfinite(c.v) || !std::isfinite(c.av)) {
      throw ValidationError("command buffer holds a non-finite command");
    }
  }
}

BufferedCommand CommandBuffer::next() {
  if (commands_.empty()) {
    throw ValidationError("next() on an empty command buffer");
  }
  const BufferedCommand out = commands_[cursor_];
  cursor_ = cursor_ + 1 == commands_.size() ? 0 : cursor_ + 1;
  return out;
}

CommandBuffer load_buffer(const JoyLog& joy) {
  if (joy.empty()) {
    throw ValidationError("cannot build a command buffer from an empty joystick log");
  }
  std::vector<BufferedCommand> commands;
  commands.reserve(joy.size());
  for (const auto& s : joy.rows) {
    commands.push_back({s.v, s.av});
  }
  return CommandBuffer(std::move(commands));
}

void write_buffer_txt(const std::filesystem::path& path, const CommandBuffer& buf) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  for (const auto& c : buf.commands()) {
    out << format_double(c.v) << ',' << format_double(c.av) << '\n';
  }
}

CommandBuffer read_buffer_txt(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open buffer " + path.string());
  }
  std::vector<BufferedCommand> commands;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view text(line);
    while (!text.empty() && (text.back() == '\r' || text.back() == ' ' || text.back() == ']')) {
      text.remove_suffix(1);
    }
    while (!text.empty() && (text.front() == ' ' || text.front() == '[')) {
      text.remove_prefix(1);
    }
    if (text.empty()) {
      continue;
    }
    const auto comma = text.find(',');
    BufferedCommand c;
    if (comma == std::string_view::npos || !parse_double(text.substr(0, comma), c.v) ||
        !parse_double(text.substr(comma + 1), c.av)) {
      throw ParseError(path.string() + ": expected 'v,av'", line_no);
    }
    commands.push_back(c);
  }
  if (commands.empty()) {
    throw ValidationError("buffer file " + path.string() + " holds no commands");
  }
  return CommandBuffer(std::move(commands));
}

SimTrace execute_replay(CommandBuffer& buf, const SlipParams& p,
                        const std::optional<MlpParams>& model, const ReplayOptions& opts) {
  if (buf.empty()) {
    throw ValidationError("replay needs a loaded command buffer");
  }
  if (!(opts.rate > 0.0) || !(opts.duration > 0.0) || opts.stride < 1 || !(opts.sim_dt > 0.0)) {
    throw ValidationError("replay needs positive rate, duration, sim_dt and stride >= 1");
  }
  const double per_tick = 1.0 / (opts.rate * opts.sim_dt);
  const auto steps_per_tick = static_cast<std::size_t>(std::llround(per_tick));
  if (steps_per_tick == 0 || std::abs(per_tick - static_cast<double>(steps_per_tick)) > 1e-6) {
    throw ValidationError("replay rate must divide the simulator step evenly");
  }
  const auto ticks = static_cast<std::size_t>(std::floor(opts.duration * opts.rate + 1e-9));
  if (ticks == 0) {
    throw ValidationError("replay duration is shorter than one tick");
  }
  p.validate();

  SimTrace trace;
  trace.dt = opts.sim_dt;
  trace.states.reserve(ticks * steps_per_tick + 1);
  trace.commands.reserve(ticks * steps_per_tick);
  trace.states.push_back(opts.initial);
  for (std::size_t tick = 0; tick < ticks; ++tick) {
    const BufferedCommand raw = buf.next();
    for (std::size_t s = 1; s < opts.stride; ++s) {
      buf.next();
    }
    ControlCommand cmd{raw.v, c_from_av_v(raw.av, raw.v, opts.eps_v)};
    if (model) {
      cmd.c = correct_angular(*model, raw.v, raw.av, opts.eps_v).c_corrected;
    }
    for (std::size_t s = 0; s < steps_per_tick; ++s) {
      trace.commands.push_back(cmd);
      trace.states.push_back(step_dynamics(trace.states.back(), cmd, p, opts.sim_dt));
    }
  }
  return trace;
}

void write_trace_csv(const std::filesystem::path& path, const SimTrace& trace) {
  if (path.has_parent_path()) {
    std::filesystem::create_directories(path.parent_path());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  out << "t,x,y,heading,v,av,cmd_v,cmd_c\n";
  for (std::size_t i = 0; i < trace.states.size(); ++i) {
    const auto& s = trace.states[i];
    const ControlCommand cmd = trace.commands.empty()
                                   ? ControlCommand{}
                                   : trace.commands[std::min(i, trace.commands.size() - 1)];
    out << format_double(trace.time_at(i)) << ',' << format_double(s.x) << ',' << format_double(s.y)
        << ',' << format_double(s.heading) << ',' << format_double(s.v) << ','
        << format_double(s.av) << ',' << format_double(cmd.v) << ',' << format_double(cmd.c)
        << '\n';
  }
}

SimTrace read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open trace " + path.string());
  }
  std::string line;
  if (!std::getline(in, line) || line.rfind("t,x,y,heading,v,av,cmd_v,cmd_c", 0) != 0) {
    throw ParseError(path.string() + ": missing trace header", 1);
  }
  SimTrace trace;
  std::vector<double> times;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.empty()) {
      continue;
    }
    double f[8];
    std::string_view rest(line);
    for (int k = 0; k < 8; ++k) {
      const auto comma = rest.find(',');
      const bool last = k == 7;
      if ((comma == std::string_view::npos) != last ||
          !parse_double(rest.substr(0, last ? rest.size() : comma), f[k])) {
        throw ParseError(path.string() + ": expected 8 numeric fields", line_no);
      }
      if (!last) {
        rest.remove_prefix(comma + 1);
      }
    }
    times.push_back(f[0]);
    trace.states.push_back({f[1], f[2], f[3], f[4], f[5], 0.0});
    trace.commands.push_back({f[6], f[7]});
  }
  if (trace.states.empty()) {
    throw ValidationError("trace " + path.string() + " holds no rows");
  }
  trace.commands.pop_back();
  if (times.size() >= 2) {
    trace.dt = times[1] - times[0];
  }
  return trace;
}

}  // namespace ikd
