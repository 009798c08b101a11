#pragma once

// Generator -> noise -> AFE -> device -> bridge -> host, as one run.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "ecgm/bridge.hpp"
#include "ecgm/device.hpp"
#include "ecgm/monitor.hpp"
#include "ecgm/signal.hpp"

namespace ecgm::pipeline {

struct ScenarioCommand {
  enum class Kind : std::uint8_t { SetCts, Connect, Disconnect, Motion };

  double t = 0.0;
  Kind kind = Kind::SetCts;
  bool level = false;

  bool operator==(const ScenarioCommand&) const = default;
};

/// Lines of `t=<s> set_cts <0|1>`, `t=<s> connect`, `t=<s> disconnect`,
/// `t=<s> motion <0|1>`; blank lines and `#` comments are skipped.
std::vector<ScenarioCommand> parse_scenario(std::string_view text);
std::string format_scenario(const std::vector<ScenarioCommand>& commands);

struct RunConfig {
  double hr_bpm = 72.0;
  double duration_s = 10.0;
  double fs = signal::kDefaultFs;
  std::uint64_t seed = 1;
  std::size_t mtu = ble::kDefaultMtu;
  double notch_hz = 50.0;
  double temperature_c = 36.6;
  int spo2 = 98;
  double accel_fs = 100.0;
  double motion_threshold_g = 0.1;

  signal::EcgTemplate ecg;
  signal::NoiseConfig noise = signal::NoiseConfig::ambulatory_default();
  signal::AfeConfig afe;
  device::DeviceConfig device;
  host::QrsConfig qrs;
  std::vector<ScenarioCommand> scenario;

  /// Push the top-level knobs (fs, mains frequency, seed) into the nested
  /// configs so that everything downstream reads one consistent value.
  void resolve();
};

/// Merge keys present in `j` over `cfg`.
void apply_json(RunConfig& cfg, const nlohmann::json& j);
nlohmann::json to_json(const RunConfig& cfg);

/// Seed for the k-th random stream of a run.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

struct Emission {
  double time = 0.0;
  std::size_t bytes = 0;
};

struct E2EResult {
  signal::EcgSignal truth;
  signal::AfeDiagnostics afe;
  host::Session session{signal::kDefaultFs};
  host::Summary summary;
  std::vector<ble::Notification> notifications;
  std::vector<Emission> emissions;
  std::vector<bool> motion_flags;
  std::uint64_t frames_generated = 0;
  std::uint64_t frames_emitted = 0;
  std::uint64_t frames_dropped = 0;
  std::uint64_t device_brts_pulses = 0;
  double energy_mah = 0.0;
  ble::BridgeStats bridge;
};

E2EResult run_e2e(RunConfig cfg);

/// run.json, ecg.csv, vitals.csv, summary.json, notifications.csv
void write_outputs(const E2EResult& result, const RunConfig& cfg, const std::string& dir);

}  // namespace ecgm::pipeline
