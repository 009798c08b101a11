#include "cli.hpp"

#include <algorithm>
#include <filesystem>
#include <iostream>
#include <iterator>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "ecgm/bridge.hpp"
#include "ecgm/codec.hpp"
#include "ecgm/config.hpp"
#include "ecgm/error.hpp"
#include "ecgm/io.hpp"
#include "ecgm/monitor.hpp"
#include "ecgm/pipeline.hpp"
#include "ecgm/power.hpp"

namespace ecgm::cli {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct RunFlags {
  std::optional<double> hr;
  std::optional<double> duration;
  std::optional<double> fs;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> mtu;
  std::optional<int> notch;
  std::string config;
};

void add_run_flags(CLI::App* sub, RunFlags& f, bool with_mtu) {
  sub->add_option("--hr", f.hr, "Heart rate in bpm")->check(CLI::Range(1.0, 300.0));
  sub->add_option("--duration", f.duration, "Duration in seconds")->check(CLI::PositiveNumber);
  sub->add_option("--fs", f.fs, "Sampling rate in Hz")->check(CLI::PositiveNumber);
  sub->add_option("--seed", f.seed, "Seed for every random stream");
  if (with_mtu) sub->add_option("--mtu", f.mtu, "ATT MTU")->check(CLI::Range(ble::kMinMtu, ble::kMaxMtu));
  sub->add_option("--notch", f.notch, "Mains frequency")->check(CLI::IsMember({50, 60}));
  sub->add_option("--config", f.config, "JSON configuration file");
}

// Config file first, then flags on top.
pipeline::RunConfig resolve_run(const RunFlags& f) {
  pipeline::RunConfig cfg;
  if (!f.config.empty()) pipeline::apply_json(cfg, config::load(f.config));
  if (f.hr) cfg.hr_bpm = *f.hr;
  if (f.duration) cfg.duration_s = *f.duration;
  if (f.fs) cfg.fs = *f.fs;
  if (f.seed) cfg.seed = *f.seed;
  if (f.mtu) cfg.mtu = *f.mtu;
  if (f.notch) cfg.notch_hz = *f.notch;
  cfg.resolve();
  return cfg;
}

codec::Bytes read_input(const std::string& path, bool hex, std::istream& in) {
  if (!path.empty() && path != "-") return io::read_capture(path, hex);
  std::string data{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  if (hex) return io::parse_hex(data);
  return {data.begin(), data.end()};
}

std::string read_input_text(const std::string& path, std::istream& in) {
  if (!path.empty() && path != "-") return io::read_text(path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_output(const std::string& path, std::string_view content, std::ostream& out) {
  if (path.empty() || path == "-") {
    out << content;
  } else {
    io::write_file(path, content);
  }
}

std::string as_text(codec::ByteView bytes) { return {bytes.begin(), bytes.end()}; }

codec::DataRow row_from_json(const json& j) {
  codec::DataRow row;
  const auto& c = j.at("code");
  if (c.is_string()) {
    const auto code = codec::code_from_name(c.get<std::string>());
    if (!code) throw Error(ErrorKind::Configuration, "unknown code name '" + c.get<std::string>() + "'");
    row.code = *code;
  } else {
    row.code = c.get<std::uint8_t>();
  }
  row.excode_level = j.value("excode_level", 0u);
  if (const auto it = j.find("bytes"); it != j.end()) {
    row.value = io::parse_hex(it->get<std::string>());
    return row;
  }
  const auto width = codec::declared_length(row.code);
  if (!width) throw Error(ErrorKind::Configuration, "code " + codec::code_name(row.code) + " needs \"bytes\"");
  const auto v = j.at("value").get<std::int64_t>();
  if (*width == 1) {
    if (v < 0 || v > 255) throw Error(ErrorKind::Configuration, "value out of range for 1-byte row");
    row.value = {static_cast<std::uint8_t>(v)};
  } else {
    if (v < -32768 || v > 32767) throw Error(ErrorKind::Configuration, "value out of range for 2-byte row");
    const auto u = static_cast<std::uint16_t>(static_cast<std::int16_t>(v));
    row.value = {static_cast<std::uint8_t>(u >> 8), static_cast<std::uint8_t>(u & 0xFF)};
  }
  return row;
}

std::vector<codec::Packet> packets_from_json(const json& doc) {
  const json& list = doc.is_object() ? doc.at("packets") : doc;
  std::vector<codec::Packet> packets;
  for (const auto& p : list) {
    codec::Packet packet;
    const json& rows = p.is_object() ? p.at("rows") : p;
    for (const auto& r : rows) packet.rows.push_back(row_from_json(r));
    packets.push_back(std::move(packet));
  }
  return packets;
}

std::string describe_row(const codec::DataRow& row) {
  std::string s = codec::code_name(row.code);
  if (row.excode_level > 0) s = "x" + std::to_string(row.excode_level) + ":" + s;
  if (codec::declared_length(row.code) == row.value.size()) return s + "=" + std::to_string(row.as_int());
  return s + "=" + io::to_hex(row.value, "");
}

int cmd_simulate(const RunFlags& flags, const std::string& out_dir, std::ostream& out) {
  const auto cfg = resolve_run(flags);
  const auto truth = signal::gen_ecg(cfg.hr_bpm, cfg.fs, cfg.duration_s, cfg.ecg);
  const auto noisy = signal::add_noise(truth.stream, cfg.noise);
  const auto afe = signal::afe_pipeline(noisy, cfg.afe);
  if (out_dir.empty()) {
    out << io::stream_to_csv(afe.stream);
    return 0;
  }
  const fs::path dir(out_dir);
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw Error(ErrorKind::Export, "cannot create '" + out_dir + "': " + ec.message());
  io::write_file((dir / "run.json").string(), pipeline::to_json(cfg).dump(2) + "\n");
  io::write_file((dir / "clean.csv").string(), io::stream_to_csv(truth.stream));
  io::write_file((dir / "noisy.csv").string(), io::stream_to_csv(noisy));
  io::write_file((dir / "afe.csv").string(), io::stream_to_csv(afe.stream));
  std::string peaks = "r_peak_index\n";
  for (auto p : truth.r_peaks) peaks += std::to_string(p) + "\n";
  io::write_file((dir / "r_peaks.csv").string(), peaks);
  out << "samples " << afe.stream.samples.size() << "\n"
      << "r_peaks " << truth.r_peaks.size() << "\n"
      << "adc_saturations " << afe.diagnostics.adc_saturations << "\n"
      << "dsp_saturations " << afe.diagnostics.dsp_saturations << "\n";
  return 0;
}

int cmd_encode(const std::string& in_path, const std::string& out_path, bool hex, std::istream& in,
               std::ostream& out) {
  const auto doc = config::parse(read_input_text(in_path, in), in_path.empty() ? "stdin" : in_path);
  std::vector<codec::Packet> packets;
  try {
    packets = packets_from_json(doc);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Configuration, std::string("packet list: ") + e.what());
  }
  std::string content;
  for (const auto& p : packets) {
    const auto frame = codec::encode_packet(p);
    content += hex ? io::to_hex(frame) + "\n" : as_text(frame);
  }
  write_output(out_path, content, out);
  return 0;
}

int cmd_decode(const std::string& in_path, bool hex, std::istream& in, std::ostream& out) {
  const auto bytes = read_input(in_path, hex, in);
  codec::StreamDecoder decoder;
  for (const auto& ev : decoder.feed(bytes)) {
    out << ev.byte_offset << " " << codec::to_string(ev.kind);
    for (const auto& row : ev.packet.rows) out << " " << describe_row(row);
    out << "\n";
  }
  const auto& s = decoder.stats();
  out << "packets " << s.packets_ok << " checksum_errors " << s.checksum_errors << " length_errors "
      << s.length_errors << " row_errors " << s.row_errors << " resyncs " << s.resyncs << " bytes "
      << s.bytes_in << "\n";
  return 0;
}

int cmd_bridge(const std::string& in_path, const std::string& out_path, std::size_t mtu, bool hex,
               bool reassemble, std::istream& in, std::ostream& out) {
  if (reassemble) {
    const auto notes = io::notifications_from_csv(read_input_text(in_path, in));
    const auto bytes = ble::reassemble(notes);
    write_output(out_path, hex ? io::to_hex(bytes) + "\n" : as_text(bytes), out);
    return 0;
  }
  const auto bytes = read_input(in_path, hex, in);
  write_output(out_path, io::notifications_to_csv(ble::segment(bytes, mtu, 0)), out);
  return 0;
}

int cmd_rails(const std::string& config_path, bool matrix, std::ostream& out) {
  device::DeviceConfig dev;
  if (!config_path.empty()) {
    const auto doc = config::load(config_path);
    try {
      device::from_json(doc, dev);
    } catch (const json::exception& e) {
      throw Error(ErrorKind::Configuration, config_path + ": " + e.what());
    }
  }
  auto rails = dev.rails;
  if (matrix) {
    for (auto& r : rails) {
      r.components.clear();
      for (const auto& c : dev.components) r.components.push_back(c.name);
    }
  }
  const auto report = power::validate_rails(dev.components, rails);
  for (const auto& v : report.verdicts) {
    out << (v.pass ? "PASS " : "FAIL ") << io::format_number(v.rail_voltage) << " V " << v.component
        << (v.pass ? " within " : " needs ") << power::format_ranges(v.allowed) << "\n";
  }
  return report.all_pass() ? 0 : 1;
}

std::vector<power::DutyShare> parse_duty(const std::vector<std::string>& items) {
  std::vector<power::DutyShare> duty;
  for (const auto& item : items) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::Parameter, "duty entry '" + item + "' is not state=fraction");
    try {
      duty.push_back({item.substr(0, eq), std::stod(item.substr(eq + 1))});
    } catch (const std::logic_error&) {
      throw Error(ErrorKind::Parameter, "duty entry '" + item + "' has a bad fraction");
    }
  }
  return duty;
}

int cmd_battery(const RunFlags& flags, const std::vector<std::string>& duty_items,
                std::optional<double> resistor, std::ostream& out) {
  const auto cfg = resolve_run(flags);
  const auto& dev = cfg.device;
  out << "capacity_mah " << io::format_number(dev.battery.capacity_mah) << "\n";
  if (!duty_items.empty()) {
    const double hours = power::battery_runtime(dev.battery, dev.current, parse_duty(duty_items));
    out << "runtime_h " << io::format_number(hours) << "\n";
  } else {
    // No duty cycle given: MCU and radio draw from a simulated run, plus the
    // always-on sensor and accelerometer.
    const auto res = pipeline::run_e2e(cfg);
    const double avg_ma =
        res.energy_mah * 3600.0 / cfg.duration_s + dev.current.sensor_on + dev.current.accel;
    out << "simulated_avg_ma " << io::format_number(avg_ma) << "\n";
    if (!(avg_ma > 0.0)) throw Error(ErrorKind::UndefinedRuntime, "average draw is zero");
    out << "runtime_h " << io::format_number(dev.battery.capacity_mah / avg_ma) << "\n";
  }
  const auto cc = power::charge_compliance(dev.battery, resistor.value_or(power::kMinProgResistorKohm));
  out << "max_charge_current_ma " << io::format_number(cc.max_current_ma) << "\n";
  if (!resistor) return 0;
  out << "resistor_kohm " << io::format_number(*resistor) << (cc.resistor_ok ? " ok" : " too_small")
      << " implied_current_ma " << io::format_number(cc.implied_current_ma) << "\n";
  return cc.resistor_ok ? 0 : 1;
}

int cmd_e2e(const RunFlags& flags, const std::string& scenario_path, const std::string& out_dir,
            std::ostream& out) {
  auto cfg = resolve_run(flags);
  if (!scenario_path.empty()) cfg.scenario = pipeline::parse_scenario(io::read_text(scenario_path));
  const auto res = pipeline::run_e2e(cfg);
  if (!out_dir.empty()) pipeline::write_outputs(res, cfg, out_dir);
  out << host::export_session(res.session, host::ExportKind::SummaryJson, cfg.qrs);
  return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err) {
  CLI::App app{"Wearable ECG monitor simulator", "ecgm"};
  app.require_subcommand(1);

  RunFlags sim_flags, bat_flags, e2e_flags;
  std::string sim_out, e2e_out, e2e_scenario;
  auto* simulate = app.add_subcommand("simulate", "Generate ECG, add noise, run the front end, write CSV");
  add_run_flags(simulate, sim_flags, false);
  simulate->add_option("--out", sim_out, "Output directory (CSV to stdout when absent)");

  std::string enc_in, enc_out;
  bool enc_hex = false;
  auto* encode = app.add_subcommand("encode", "Encode JSON packets into wire frames");
  encode->add_option("--in", enc_in, "JSON packet list (stdin when absent)");
  encode->add_option("--out", enc_out, "Output file (stdout when absent)");
  encode->add_flag("--hex", enc_hex, "Write one hex line per frame");

  std::string dec_in;
  bool dec_hex = false;
  auto* decode = app.add_subcommand("decode", "Decode a byte capture and report packets and errors");
  decode->add_option("--in", dec_in, "Capture file (stdin when absent)");
  decode->add_flag("--hex", dec_hex, "Input is a hexdump");

  std::string br_in, br_out;
  std::size_t br_mtu = ble::kDefaultMtu;
  bool br_hex = false, br_reassemble = false;
  auto* bridge = app.add_subcommand("bridge", "Segment a capture into notifications, or reassemble them");
  bridge->add_option("--in", br_in, "Capture, or notification CSV with --reassemble");
  bridge->add_option("--out", br_out, "Output file (stdout when absent)");
  bridge->add_option("--mtu", br_mtu, "ATT MTU")->check(CLI::Range(ble::kMinMtu, ble::kMaxMtu));
  bridge->add_flag("--hex", br_hex, "Captures are hexdumps");
  bridge->add_flag("--reassemble", br_reassemble, "Rebuild the byte stream from notifications");

  std::string rails_config;
  bool rails_matrix = false;
  auto* rails = app.add_subcommand("rails-check", "Check component supply ranges against the rails");
  rails->add_option("--config", rails_config, "Device configuration with components and rails");
  rails->add_flag("--matrix", rails_matrix, "Check every component against every rail");

  std::vector<std::string> duty;
  std::optional<double> resistor;
  auto* battery = app.add_subcommand("battery", "Battery runtime and charge-resistor compliance");
  add_run_flags(battery, bat_flags, false);
  battery->add_option("--duty", duty, "state=fraction entries summing to 1");
  battery->add_option("--resistor", resistor, "Charge programming resistor in kOhm")->check(CLI::PositiveNumber);

  auto* e2e = app.add_subcommand("e2e", "Full generator to host run");
  add_run_flags(e2e, e2e_flags, true);
  e2e->add_option("--scenario", e2e_scenario, "Timed command script");
  e2e->add_option("--out", e2e_out, "Output directory");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n\n" << app.help();
    return 2;
  }

  try {
    if (*simulate) return cmd_simulate(sim_flags, sim_out, out);
    if (*encode) return cmd_encode(enc_in, enc_out, enc_hex, in, out);
    if (*decode) return cmd_decode(dec_in, dec_hex, in, out);
    if (*bridge) return cmd_bridge(br_in, br_out, br_mtu, br_hex, br_reassemble, in, out);
    if (*rails) return cmd_rails(rails_config, rails_matrix, out);
    if (*battery) return cmd_battery(bat_flags, duty, resistor, out);
    if (*e2e) return cmd_e2e(e2e_flags, e2e_scenario, e2e_out, out);
  } catch (const Error& e) {
    err << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    const bool usage = e.kind() == ErrorKind::Parameter || e.kind() == ErrorKind::Configuration;
    return usage ? 2 : 1;
  }
  err << app.help();
  return 2;
}

}  // namespace ecgm::cli
