#include "ecgm/device.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ecgm/error.hpp"

namespace ecgm::device {

namespace {
// Absorbs floating drift when a partition of steps lands on a timer tick.
constexpr double kTickSlack = 1e-9;
constexpr double kBitsPerUartByte = 10.0;
constexpr double kSecondsPerHour = 3600.0;
}  // namespace

const char* to_string(EventKind kind) noexcept {
  switch (kind) {
    case EventKind::Interrupt: return "interrupt";
    case EventKind::Wake: return "wake";
    case EventKind::FrameBuffered: return "frame_buffered";
    case EventKind::FrameEmitted: return "frame_emitted";
    case EventKind::Overflow: return "overflow";
    case EventKind::BrtsPulse: return "brts_pulse";
    case EventKind::Sleep: return "sleep";
  }
  return "?";
}

DeviceModel::DeviceModel(DeviceConfig cfg) : cfg_(std::move(cfg)) {
  const auto& c = cfg_.cadence;
  if (!(c.fs > 0.0)) throw Error(ErrorKind::Parameter, "device sample rate must be positive");
  if (c.raw_rows_per_frame == 0 || c.raw_rows_per_frame * 4 > codec::kMaxPayload) {
    throw Error(ErrorKind::Parameter, "raw rows per frame must be in [1, 42]");
  }
  if (!(c.vitals_period_s > 0.0)) throw Error(ErrorKind::Parameter, "vitals period must be positive");
  if (!(c.uart_baud > 0.0)) throw Error(ErrorKind::Parameter, "UART baud rate must be positive");
  if (cfg_.uart_capacity < codec::kMaxPayload + 4) {
    throw Error(ErrorKind::Parameter, "UART buffer must hold at least one maximal frame");
  }
  for (double d : {cfg_.current.mcu_sleep, cfg_.current.mcu_active, cfg_.current.ble_tx,
                   cfg_.current.sensor_on, cfg_.current.accel}) {
    if (!(d >= 0.0)) throw Error(ErrorKind::Parameter, "current draws must be >= 0");
  }
}

double DeviceModel::frame_period() const noexcept {
  return static_cast<double>(cfg_.cadence.raw_rows_per_frame) / cfg_.cadence.fs;
}

double DeviceModel::battery_remaining_mah() const noexcept {
  return std::max(0.0, cfg_.battery.capacity_mah - energy_used_mah_);
}

void DeviceModel::push_row(double t, codec::DataRow row) {
  const auto pos = std::upper_bound(pending_.begin(), pending_.end(), t,
                                    [](double v, const TimedRow& r) { return v < r.t; });
  pending_.insert(pos, TimedRow{t, std::move(row)});
}

void DeviceModel::push_ecg(std::span<const double> codes, std::size_t first_index) {
  for (std::size_t i = 0; i < codes.size(); ++i) {
    const double c = std::clamp(std::round(codes[i]), signal::kAdcMinCode, signal::kAdcMaxCode);
    push_row(static_cast<double>(first_index + i) / cfg_.cadence.fs,
             codec::DataRow::raw_ecg(static_cast<std::int16_t>(c)));
  }
}

void DeviceModel::set_cts(bool high) {
  if (high && !pins_.bcts) cts_edge_ = true;
  pins_.bcts = high;
}

void DeviceModel::queue_vitals(double t) {
  push_row(t, codec::DataRow::poor_signal(vitals_.poor_signal));
  if (vitals_.heart_rate > 0) push_row(t, codec::DataRow::heart_rate(vitals_.heart_rate));
  const double centi = std::clamp(std::round(vitals_.temperature_c * 100.0), -32768.0, 32767.0);
  push_row(t, codec::DataRow::temperature_centi(static_cast<std::int16_t>(centi)));
  push_row(t, codec::DataRow::spo2(vitals_.spo2));
  push_row(t, codec::DataRow::motion(vitals_.motion));
}

std::vector<codec::Packet> DeviceModel::pack(std::vector<codec::DataRow> rows) const {
  std::vector<codec::Packet> frames;
  std::size_t bytes = 0, raw = 0;
  for (auto& row : rows) {
    const bool is_raw = row.code == codec::code::kRawEcg;
    const std::size_t size = row.wire_size();
    if (frames.empty() || bytes + size > codec::kMaxPayload ||
        (is_raw && raw == cfg_.cadence.raw_rows_per_frame)) {
      frames.emplace_back();
      bytes = 0;
      raw = 0;
    }
    bytes += size;
    raw += is_raw ? 1 : 0;
    frames.back().rows.push_back(std::move(row));
  }
  return frames;
}

void DeviceModel::wake(double t, StepResult& out) {
  out.events.push_back({t, EventKind::Interrupt, 0});
  state_ = McuState::Active;
  pins_.brts = false;
  out.events.push_back({t, EventKind::Wake, 0});

  std::vector<codec::DataRow> due;
  while (!pending_.empty() && pending_.front().t < t - 1e-12) {
    due.push_back(std::move(pending_.front().row));
    pending_.pop_front();
  }
  for (const auto& packet : pack(std::move(due))) {
    codec::Bytes frame = codec::encode_packet(packet);
    while (!uart_.empty() && buffered_bytes_ + frame.size() > cfg_.uart_capacity) {
      buffered_bytes_ -= uart_.front().size();
      out.events.push_back({t, EventKind::Overflow, uart_.front().size()});
      uart_.pop_front();
      ++frames_dropped_;
    }
    buffered_bytes_ += frame.size();
    out.events.push_back({t, EventKind::FrameBuffered, frame.size()});
    uart_.push_back(std::move(frame));
    ++frames_generated_;
  }

  std::size_t sent = 0;
  if (pins_.en && pins_.bcts) {
    while (!uart_.empty()) {
      const auto& frame = uart_.front();
      out.emitted.insert(out.emitted.end(), frame.begin(), frame.end());
      out.events.push_back({t, EventKind::FrameEmitted, frame.size()});
      sent += frame.size();
      buffered_bytes_ -= frame.size();
      uart_.pop_front();
      ++frames_emitted_;
    }
  }
  if (sent > 0) {
    pins_.brts = true;
    ++brts_pulses_;
    out.events.push_back({t, EventKind::BrtsPulse, sent});
  }

  const double tx_s = static_cast<double>(sent) * kBitsPerUartByte / cfg_.cadence.uart_baud;
  const double active_s = cfg_.cadence.wake_overhead_s + tx_s;
  const auto& draw = cfg_.current;
  const double extra = ((draw.mcu_active - draw.mcu_sleep) * active_s + draw.ble_tx * tx_s) /
                       kSecondsPerHour;
  out.energy_mah += extra;
  out.active_s += active_s;

  state_ = McuState::Sleep;
  out.events.push_back({t, EventKind::Sleep, 0});
}

StepResult DeviceModel::step(double dt) {
  if (!(dt > 0.0)) throw Error(ErrorKind::Parameter, "step length must be positive");
  StepResult out;
  const auto& draw = cfg_.current;
  out.energy_mah = draw.mcu_sleep * dt / kSecondsPerHour;

  if (cts_edge_ && pins_.en && pins_.bcts && !uart_.empty()) wake(clock_, out);
  cts_edge_ = false;

  const double t_end = clock_ + dt;
  const double frame_p = frame_period();
  const double vitals_p = cfg_.cadence.vitals_period_s;
  for (;;) {
    const double t_frame = static_cast<double>(next_frame_tick_) * frame_p;
    const double t_vitals = static_cast<double>(next_vitals_tick_) * vitals_p;
    if (std::min(t_frame, t_vitals) > t_end + kTickSlack) break;
    if (t_vitals <= t_frame) {
      if (vitals_.enabled) queue_vitals(t_vitals);
      ++next_vitals_tick_;
      continue;
    }
    if (!pending_.empty() && pending_.front().t < t_frame - 1e-12) wake(t_frame, out);
    ++next_frame_tick_;
  }

  clock_ = t_end;
  energy_used_mah_ += out.energy_mah;
  return out;
}

std::vector<bool> motion_gate(const signal::SampleStream& x, const signal::SampleStream& y,
                              const signal::SampleStream& z, double window_s,
                              double threshold_g) {
  if (x.size() != y.size() || x.size() != z.size()) {
    throw Error(ErrorKind::Parameter, "accelerometer axes must have equal length");
  }
  if (x.size() == 0) return {};
  if (x.fs != y.fs || x.fs != z.fs || !(x.fs > 0.0)) {
    throw Error(ErrorKind::Parameter, "accelerometer axes must share a positive sample rate");
  }
  const auto window = static_cast<std::size_t>(std::llround(window_s * x.fs));
  if (!(window_s > 0.0) || window < 2) {
    throw Error(ErrorKind::Parameter, "motion window must span at least 2 samples");
  }

  auto variance = [](std::span<const double> v) {
    double m = 0.0;
    for (double s : v) m += s;
    m /= static_cast<double>(v.size());
    double acc = 0.0;
    for (double s : v) acc += (s - m) * (s - m);
    return acc / static_cast<double>(v.size());
  };

  std::vector<bool> flags;
  for (std::size_t start = 0; start + 2 <= x.size(); start += window) {
    const std::size_t len = std::min(window, x.size() - start);
    const double var = variance(std::span(x.samples).subspan(start, len)) +
                       variance(std::span(y.samples).subspan(start, len)) +
                       variance(std::span(z.samples).subspan(start, len));
    flags.push_back(std::sqrt(var) > threshold_g);
  }
  return flags;
}

}  // namespace ecgm::device
