#pragma once

// Discrete-event model of the wearable's MCU forwarding loop.
//
// The MCU sleeps in its low-power mode until the sensor's frame timer fires
// with data waiting (or a CTS edge finds frames held back). Each wake packs
// the due rows into frames, pushes them toward the BLE bridge when BCTS is
// high, and goes back to sleep. Time only advances through step().

#include <cstddef>
#include <cstdint>
#include <deque>
#include <span>
#include <vector>

#include "ecgm/codec.hpp"
#include "ecgm/power.hpp"
#include "ecgm/signal.hpp"

namespace ecgm::device {

struct Cadence {
  double fs = signal::kDefaultFs;
  std::size_t raw_rows_per_frame = 16;
  double vitals_period_s = 1.0;
  double wake_overhead_s = 200e-6;
  double uart_baud = 57600.0;
};

/// Latest auxiliary readings, reported once per vitals period.
struct Vitals {
  bool enabled = false;
  std::uint8_t poor_signal = 0;
  std::uint8_t heart_rate = 0;  // 0 suppresses the HEART_RATE row
  double temperature_c = 36.5;
  std::uint8_t spo2 = 98;
  bool motion = false;
};

struct DeviceConfig {
  Cadence cadence;
  power::CurrentProfile current;
  power::BatteryModel battery;
  std::size_t uart_capacity = 4096;
  std::vector<power::ComponentSpec> components = power::board_components();
  std::vector<power::PowerRail> rails = power::board_rails();
};

enum class McuState : std::uint8_t { Sleep, Active };

struct Pins {
  bool en = true;
  bool bcts = true;
  bool brts = false;
};

enum class EventKind : std::uint8_t {
  Interrupt,
  Wake,
  FrameBuffered,
  FrameEmitted,
  Overflow,
  BrtsPulse,
  Sleep,
};

const char* to_string(EventKind kind) noexcept;

struct Event {
  double time = 0.0;
  EventKind kind = EventKind::Interrupt;
  std::size_t bytes = 0;
};

struct StepResult {
  codec::Bytes emitted;
  std::vector<Event> events;
  /// MCU and radio dwell only. The sensor and accelerometer run
  /// continuously and are added by whoever budgets the battery.
  double energy_mah = 0.0;
  double active_s = 0.0;
};

class DeviceModel {
 public:
  explicit DeviceModel(DeviceConfig cfg = {});

  /// Queue a sensor row that becomes available at time t.
  void push_row(double t, codec::DataRow row);

  /// Queue RAW_ECG rows for consecutive samples; sample i arrives at
  /// (first_index + i) / fs.
  void push_ecg(std::span<const double> codes, std::size_t first_index = 0);

  void set_vitals(const Vitals& vitals) { vitals_ = vitals; }
  void set_motion(bool moving) { vitals_.motion = moving; }
  void set_cts(bool high);
  void set_en(bool high) { pins_.en = high; }

  StepResult step(double dt);

  double clock() const noexcept { return clock_; }
  McuState state() const noexcept { return state_; }
  const Pins& pins() const noexcept { return pins_; }
  const Vitals& vitals() const noexcept { return vitals_; }
  const DeviceConfig& config() const noexcept { return cfg_; }

  std::size_t pending_rows() const noexcept { return pending_.size(); }
  std::size_t buffered_bytes() const noexcept { return buffered_bytes_; }
  std::size_t buffered_frames() const noexcept { return uart_.size(); }
  std::uint64_t frames_generated() const noexcept { return frames_generated_; }
  std::uint64_t frames_emitted() const noexcept { return frames_emitted_; }
  std::uint64_t frames_dropped() const noexcept { return frames_dropped_; }
  std::uint64_t brts_pulses() const noexcept { return brts_pulses_; }
  double energy_used_mah() const noexcept { return energy_used_mah_; }
  double battery_remaining_mah() const noexcept;

 private:
  struct TimedRow {
    double t;
    codec::DataRow row;
  };

  double frame_period() const noexcept;
  void queue_vitals(double t);
  void wake(double t, StepResult& out);
  std::vector<codec::Packet> pack(std::vector<codec::DataRow> rows) const;

  DeviceConfig cfg_;
  Vitals vitals_;
  Pins pins_;
  McuState state_ = McuState::Sleep;
  double clock_ = 0.0;
  std::uint64_t next_frame_tick_ = 1;
  std::uint64_t next_vitals_tick_ = 1;
  bool cts_edge_ = false;
  std::deque<TimedRow> pending_;
  std::deque<codec::Bytes> uart_;
  std::size_t buffered_bytes_ = 0;
  std::uint64_t frames_generated_ = 0;
  std::uint64_t frames_emitted_ = 0;
  std::uint64_t frames_dropped_ = 0;
  std::uint64_t brts_pulses_ = 0;
  double energy_used_mah_ = 0.0;
};

/// Per-window motion flags from a 3-axis accelerometer: true when the total
/// standard deviation sqrt(var_x + var_y + var_z) in the window exceeds
/// threshold_g. A trailing partial window counts if it holds >= 2 samples.
std::vector<bool> motion_gate(const signal::SampleStream& x, const signal::SampleStream& y,
                              const signal::SampleStream& z, double window_s,
                              double threshold_g);

}  // namespace ecgm::device
