#include "ecgm/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <random>
#include <sstream>

#include "ecgm/config.hpp"
#include "ecgm/error.hpp"
#include "ecgm/io.hpp"

namespace ecgm::pipeline {

namespace {

constexpr std::uint64_t kEmgStream = 1;
constexpr std::uint64_t kContactStream = 2;
constexpr std::uint64_t kAccelStream = 3;
constexpr std::uint64_t kTemperatureStream = 4;
constexpr double kTimeSlack = 1e-9;

const char* command_name(ScenarioCommand::Kind kind) {
  switch (kind) {
    case ScenarioCommand::Kind::SetCts: return "set_cts";
    case ScenarioCommand::Kind::Connect: return "connect";
    case ScenarioCommand::Kind::Disconnect: return "disconnect";
    case ScenarioCommand::Kind::Motion: return "motion";
  }
  return "?";
}

[[noreturn]] void scenario_error(std::size_t line, const std::string& what) {
  throw Error(ErrorKind::Configuration, "scenario line " + std::to_string(line) + ": " + what);
}

}  // namespace

std::vector<ScenarioCommand> parse_scenario(std::string_view text) {
  std::vector<ScenarioCommand> out;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream words(line);
    std::string stamp, verb, arg, extra;
    if (!(words >> stamp)) continue;
    if (stamp.rfind("t=", 0) != 0) scenario_error(line_no, "expected t=<seconds>");
    ScenarioCommand cmd;
    try {
      std::size_t used = 0;
      cmd.t = std::stod(stamp.substr(2), &used);
      if (used != stamp.size() - 2) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      scenario_error(line_no, "bad time '" + stamp + "'");
    }
    if (!(cmd.t >= 0.0)) scenario_error(line_no, "time must be non-negative");
    if (!(words >> verb)) scenario_error(line_no, "missing command");
    const bool takes_level = verb == "set_cts" || verb == "motion";
    if (verb == "set_cts") {
      cmd.kind = ScenarioCommand::Kind::SetCts;
    } else if (verb == "motion") {
      cmd.kind = ScenarioCommand::Kind::Motion;
    } else if (verb == "connect") {
      cmd.kind = ScenarioCommand::Kind::Connect;
    } else if (verb == "disconnect") {
      cmd.kind = ScenarioCommand::Kind::Disconnect;
    } else {
      scenario_error(line_no, "unknown command '" + verb + "'");
    }
    if (takes_level) {
      if (!(words >> arg) || (arg != "0" && arg != "1")) {
        scenario_error(line_no, verb + " needs 0 or 1");
      }
      cmd.level = arg == "1";
    }
    if (words >> extra) scenario_error(line_no, "unexpected '" + extra + "'");
    out.push_back(cmd);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const ScenarioCommand& a, const ScenarioCommand& b) { return a.t < b.t; });
  return out;
}

std::string format_scenario(const std::vector<ScenarioCommand>& commands) {
  std::string out;
  for (const auto& c : commands) {
    out += "t=" + io::format_number(c.t) + " " + command_name(c.kind);
    if (c.kind == ScenarioCommand::Kind::SetCts || c.kind == ScenarioCommand::Kind::Motion) {
      out += c.level ? " 1" : " 0";
    }
    out += "\n";
  }
  return out;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) {
  // splitmix64 finalizer over (seed, stream)
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

void RunConfig::resolve() {
  device.cadence.fs = fs;
  afe.notch.f0_hz = notch_hz;
  noise.powerline.freq_hz = notch_hz;
  noise.emg.seed = derive_seed(seed, kEmgStream);
  noise.contact.seed = derive_seed(seed, kContactStream);
}

void apply_json(RunConfig& cfg, const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorKind::Configuration, "run configuration must be a JSON object");
  try {
    auto read = [&](const char* key, auto& field) {
      if (const auto it = j.find(key); it != j.end()) it->get_to(field);
    };
    read("hr", cfg.hr_bpm);
    read("duration", cfg.duration_s);
    read("fs", cfg.fs);
    read("seed", cfg.seed);
    read("mtu", cfg.mtu);
    read("notch", cfg.notch_hz);
    read("temperature_c", cfg.temperature_c);
    read("spo2", cfg.spo2);
    read("accel_fs", cfg.accel_fs);
    read("motion_threshold_g", cfg.motion_threshold_g);
    read("ecg", cfg.ecg);
    read("noise", cfg.noise);
    read("afe", cfg.afe);
    read("device", cfg.device);
    // Device sections may also sit at the top level of a device config file.
    device::from_json(j, cfg.device);
    if (const auto it = j.find("qrs"); it != j.end()) {
      const auto& q = *it;
      auto rq = [&](const char* key, double& field) {
        if (const auto f = q.find(key); f != q.end()) f->get_to(field);
      };
      rq("band_lo_hz", cfg.qrs.band_lo_hz);
      rq("band_hi_hz", cfg.qrs.band_hi_hz);
      rq("window_s", cfg.qrs.window_s);
      rq("refractory_s", cfg.qrs.refractory_s);
      rq("min_duration_s", cfg.qrs.min_duration_s);
      rq("t_wave_window_s", cfg.qrs.t_wave_window_s);
    }
    if (const auto it = j.find("scenario"); it != j.end()) {
      std::string text;
      for (const auto& line : *it) text += line.get<std::string>() + "\n";
      cfg.scenario = parse_scenario(text);
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Configuration, std::string("run configuration: ") + e.what());
  }
}

nlohmann::json to_json(const RunConfig& cfg) {
  nlohmann::json scenario = nlohmann::json::array();
  std::istringstream lines(format_scenario(cfg.scenario));
  for (std::string line; std::getline(lines, line);) scenario.push_back(line);
  return {
      {"hr", cfg.hr_bpm},
      {"duration", cfg.duration_s},
      {"fs", cfg.fs},
      {"seed", cfg.seed},
      {"mtu", cfg.mtu},
      {"notch", cfg.notch_hz},
      {"temperature_c", cfg.temperature_c},
      {"spo2", cfg.spo2},
      {"accel_fs", cfg.accel_fs},
      {"motion_threshold_g", cfg.motion_threshold_g},
      {"ecg", cfg.ecg},
      {"noise", cfg.noise},
      {"afe", cfg.afe},
      {"device", cfg.device},
      {"qrs",
       {{"band_lo_hz", cfg.qrs.band_lo_hz},
        {"band_hi_hz", cfg.qrs.band_hi_hz},
        {"window_s", cfg.qrs.window_s},
        {"refractory_s", cfg.qrs.refractory_s},
        {"min_duration_s", cfg.qrs.min_duration_s},
        {"t_wave_window_s", cfg.qrs.t_wave_window_s}}},
      {"scenario", scenario},
  };
}

namespace {

struct Accel {
  signal::SampleStream x, y, z;
};

Accel synth_accel(const RunConfig& cfg) {
  const auto n = static_cast<std::size_t>(std::floor(cfg.duration_s * cfg.accel_fs + kTimeSlack));
  Accel a{{cfg.accel_fs, signal::Domain::Analog, std::vector<double>(n)},
          {cfg.accel_fs, signal::Domain::Analog, std::vector<double>(n)},
          {cfg.accel_fs, signal::Domain::Analog, std::vector<double>(n)}};
  std::mt19937_64 rng(derive_seed(cfg.seed, kAccelStream));
  std::normal_distribution<double> rest(0.0, 0.005);
  std::normal_distribution<double> moving(0.0, 0.3);
  bool in_motion = false;
  std::size_t next_cmd = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / cfg.accel_fs;
    while (next_cmd < cfg.scenario.size() && cfg.scenario[next_cmd].t <= t + kTimeSlack) {
      if (cfg.scenario[next_cmd].kind == ScenarioCommand::Kind::Motion) {
        in_motion = cfg.scenario[next_cmd].level;
      }
      ++next_cmd;
    }
    a.x.samples[i] = rest(rng) + (in_motion ? moving(rng) : 0.0);
    a.y.samples[i] = rest(rng) + (in_motion ? moving(rng) : 0.0);
    a.z.samples[i] = 1.0 + rest(rng);
  }
  return a;
}

}  // namespace

E2EResult run_e2e(RunConfig cfg) {
  cfg.resolve();
  if (!(cfg.duration_s > 0.0)) throw Error(ErrorKind::Parameter, "duration must be positive");

  E2EResult res;
  res.session = host::Session(cfg.fs);
  res.truth = signal::gen_ecg(cfg.hr_bpm, cfg.fs, cfg.duration_s, cfg.ecg);
  const auto noisy = signal::add_noise(res.truth.stream, cfg.noise);
  const auto afe = signal::afe_pipeline(noisy, cfg.afe);
  res.afe = afe.diagnostics;

  const auto accel = synth_accel(cfg);
  res.motion_flags = accel.x.size() >= 2
                         ? device::motion_gate(accel.x, accel.y, accel.z, cfg.device.cadence.vitals_period_s,
                                               cfg.motion_threshold_g)
                         : std::vector<bool>{};

  device::DeviceModel dev(cfg.device);
  device::Vitals vitals;
  vitals.enabled = true;
  vitals.heart_rate = static_cast<std::uint8_t>(std::clamp(std::lround(cfg.hr_bpm), 1L, 255L));
  vitals.spo2 = static_cast<std::uint8_t>(std::clamp(cfg.spo2, 0, 100));
  vitals.temperature_c = cfg.temperature_c;
  dev.set_vitals(vitals);
  dev.push_ecg(afe.stream.samples);

  ble::Bridge bridge;
  bridge.handle_event(ble::BridgeEvent::power_on());
  const bool scripted_link = std::any_of(cfg.scenario.begin(), cfg.scenario.end(), [](const auto& c) {
    return c.kind == ScenarioCommand::Kind::Connect || c.kind == ScenarioCommand::Kind::Disconnect;
  });
  auto connect = [&] {
    bridge.handle_event(ble::BridgeEvent::connect());
    if (cfg.mtu != ble::kDefaultMtu) bridge.handle_event(ble::BridgeEvent::mtu_update(cfg.mtu));
  };
  if (!scripted_link) connect();

  auto deliver = [&](const std::vector<ble::Notification>& notes) {
    if (notes.empty()) return;
    res.session.ingest(notes);
    res.notifications.insert(res.notifications.end(), notes.begin(), notes.end());
  };

  // Run one frame period past the end so the last partial frame goes out.
  const double frame_p = static_cast<double>(cfg.device.cadence.raw_rows_per_frame) / cfg.fs;
  const double t_end = cfg.duration_s + frame_p;
  const double vitals_p = cfg.device.cadence.vitals_period_s;
  std::vector<double> stops;
  for (double t = vitals_p; t < t_end; t += vitals_p) stops.push_back(t);
  for (const auto& c : cfg.scenario) {
    if (c.t > 0.0 && c.t < t_end) stops.push_back(c.t);
  }
  stops.push_back(t_end);
  std::sort(stops.begin(), stops.end());
  stops.erase(std::unique(stops.begin(), stops.end(),
                          [](double a, double b) { return std::abs(a - b) < kTimeSlack; }),
              stops.end());

  std::mt19937_64 temp_rng(derive_seed(cfg.seed, kTemperatureStream));
  std::normal_distribution<double> temp_jitter(0.0, 0.02);
  std::size_t next_cmd = 0;
  auto apply_commands = [&](double now) {
    while (next_cmd < cfg.scenario.size() && cfg.scenario[next_cmd].t <= now + kTimeSlack) {
      const auto& c = cfg.scenario[next_cmd++];
      switch (c.kind) {
        case ScenarioCommand::Kind::SetCts:
          dev.set_cts(c.level);
          break;
        case ScenarioCommand::Kind::Connect:
          connect();
          deliver(bridge.uart_in({}).notifications);
          break;
        case ScenarioCommand::Kind::Disconnect:
          bridge.handle_event(ble::BridgeEvent::disconnect());
          break;
        case ScenarioCommand::Kind::Motion:
          break;  // already baked into the accelerometer trace
      }
    }
  };

  double now = 0.0;
  apply_commands(now);
  for (double stop : stops) {
    // The next vitals tick reports the motion window that ends on it.
    const auto tick = static_cast<std::size_t>(std::floor(now / vitals_p + kTimeSlack)) + 1;
    if (tick - 1 < res.motion_flags.size()) dev.set_motion(res.motion_flags[tick - 1]);
    vitals.temperature_c = cfg.temperature_c + temp_jitter(temp_rng);
    vitals.motion = dev.vitals().motion;
    dev.set_vitals(vitals);

    const auto step = dev.step(stop - now);
    now = stop;
    for (const auto& ev : step.events) {
      if (ev.kind == device::EventKind::FrameEmitted) res.emissions.push_back({ev.time, ev.bytes});
    }
    if (!step.emitted.empty()) deliver(bridge.uart_in(step.emitted).notifications);
    apply_commands(now);
  }

  res.frames_generated = dev.frames_generated();
  res.frames_emitted = dev.frames_emitted();
  res.frames_dropped = dev.frames_dropped();
  res.device_brts_pulses = dev.brts_pulses();
  res.energy_mah = dev.energy_used_mah();
  res.bridge = bridge.stats();
  res.summary = host::summarize(res.session, cfg.qrs);
  return res;
}

void write_outputs(const E2EResult& result, const RunConfig& cfg, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Export, "cannot create '" + dir + "': " + ec.message());
  const std::filesystem::path base(dir);
  RunConfig resolved = cfg;
  resolved.resolve();
  io::write_file((base / "run.json").string(), to_json(resolved).dump(2) + "\n");
  host::export_to_file(result.session, host::ExportKind::EcgCsv, (base / "ecg.csv").string(), cfg.qrs);
  host::export_to_file(result.session, host::ExportKind::VitalsCsv, (base / "vitals.csv").string(), cfg.qrs);
  host::export_to_file(result.session, host::ExportKind::SummaryJson, (base / "summary.json").string(),
                       cfg.qrs);
  io::write_file((base / "notifications.csv").string(), io::notifications_to_csv(result.notifications));
}

}  // namespace ecgm::pipeline
