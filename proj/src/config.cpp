#include "ecgm/config.hpp"

#include "ecgm/error.hpp"
#include "ecgm/io.hpp"

namespace {

template <typename T>
void read(const nlohmann::json& j, const char* key, T& field) {
  if (const auto it = j.find(key); it != j.end()) it->get_to(field);
}

}  // namespace

namespace ecgm::signal {

void to_json(nlohmann::json& j, const Wave& v) {
  j = {{"offset_s", v.offset_s}, {"width_s", v.width_s}, {"amplitude_mv", v.amplitude_mv}};
}
void from_json(const nlohmann::json& j, Wave& v) {
  read(j, "offset_s", v.offset_s);
  read(j, "width_s", v.width_s);
  read(j, "amplitude_mv", v.amplitude_mv);
}

void to_json(nlohmann::json& j, const EcgTemplate& v) {
  j = {{"p", v.p}, {"q", v.q}, {"r", v.r}, {"s", v.s}, {"t", v.t}};
}
void from_json(const nlohmann::json& j, EcgTemplate& v) {
  read(j, "p", v.p);
  read(j, "q", v.q);
  read(j, "r", v.r);
  read(j, "s", v.s);
  read(j, "t", v.t);
}

void to_json(nlohmann::json& j, const NoiseConfig& v) {
  j = {
      {"baseline", {{"freq_hz", v.baseline.freq_hz}, {"amplitude_mv", v.baseline.amplitude_mv}}},
      {"powerline", {{"freq_hz", v.powerline.freq_hz}, {"amplitude_mv", v.powerline.amplitude_mv}}},
      {"emg",
       {{"band_lo_hz", v.emg.band_lo_hz},
        {"band_hi_hz", v.emg.band_hi_hz},
        {"rms_mv", v.emg.rms_mv},
        {"seed", v.emg.seed}}},
      {"contact",
       {{"rate_per_s", v.contact.rate_per_s},
        {"step_mv", v.contact.step_mv},
        {"decay_s", v.contact.decay_s},
        {"seed", v.contact.seed}}},
  };
}
void from_json(const nlohmann::json& j, NoiseConfig& v) {
  if (const auto it = j.find("baseline"); it != j.end()) {
    read(*it, "freq_hz", v.baseline.freq_hz);
    read(*it, "amplitude_mv", v.baseline.amplitude_mv);
  }
  if (const auto it = j.find("powerline"); it != j.end()) {
    read(*it, "freq_hz", v.powerline.freq_hz);
    read(*it, "amplitude_mv", v.powerline.amplitude_mv);
  }
  if (const auto it = j.find("emg"); it != j.end()) {
    read(*it, "band_lo_hz", v.emg.band_lo_hz);
    read(*it, "band_hi_hz", v.emg.band_hi_hz);
    read(*it, "rms_mv", v.emg.rms_mv);
    read(*it, "seed", v.emg.seed);
  }
  if (const auto it = j.find("contact"); it != j.end()) {
    read(*it, "rate_per_s", v.contact.rate_per_s);
    read(*it, "step_mv", v.contact.step_mv);
    read(*it, "decay_s", v.contact.decay_s);
    read(*it, "seed", v.contact.seed);
  }
}

void to_json(nlohmann::json& j, const AfeConfig& v) {
  j = {
      {"hpf_cutoff_hz", v.hpf_cutoff_hz},
      {"lna_gain", v.lna_gain},
      {"adc_bits", v.adc_bits},
      {"adc_full_scale_mv", v.adc_full_scale_mv},
      {"notch", {{"f0_hz", v.notch.f0_hz}, {"q", v.notch.q}, {"enabled", v.notch.enabled}}},
      {"lpf_cutoff_hz", v.lpf_cutoff_hz},
      {"notch_first", v.notch_first},
  };
}
void from_json(const nlohmann::json& j, AfeConfig& v) {
  read(j, "hpf_cutoff_hz", v.hpf_cutoff_hz);
  read(j, "lna_gain", v.lna_gain);
  read(j, "adc_bits", v.adc_bits);
  read(j, "adc_full_scale_mv", v.adc_full_scale_mv);
  if (const auto it = j.find("notch"); it != j.end()) {
    read(*it, "f0_hz", v.notch.f0_hz);
    read(*it, "q", v.notch.q);
    read(*it, "enabled", v.notch.enabled);
  }
  read(j, "lpf_cutoff_hz", v.lpf_cutoff_hz);
  read(j, "notch_first", v.notch_first);
}

}  // namespace ecgm::signal

namespace ecgm::power {

void to_json(nlohmann::json& j, const ComponentSpec& v) {
  j = {{"name", v.name}, {"ranges", nlohmann::json::array()}};
  for (const auto& r : v.ranges) j["ranges"].push_back({r.min_v, r.max_v});
}
void from_json(const nlohmann::json& j, ComponentSpec& v) {
  j.at("name").get_to(v.name);
  v.ranges.clear();
  for (const auto& r : j.at("ranges")) {
    if (!r.is_array() || r.size() != 2) {
      throw Error(ErrorKind::Configuration, "range of " + v.name + " must be [min, max]");
    }
    v.ranges.push_back({r[0].get<double>(), r[1].get<double>()});
  }
}

void to_json(nlohmann::json& j, const PowerRail& v) {
  j = {{"voltage", v.voltage}, {"components", v.components}};
}
void from_json(const nlohmann::json& j, PowerRail& v) {
  j.at("voltage").get_to(v.voltage);
  read(j, "components", v.components);
}

void to_json(nlohmann::json& j, const BatteryModel& v) {
  j = {{"capacity_mah", v.capacity_mah},
       {"min_v", v.min_v},
       {"max_v", v.max_v},
       {"max_charge_c", v.max_charge_c}};
}
void from_json(const nlohmann::json& j, BatteryModel& v) {
  read(j, "capacity_mah", v.capacity_mah);
  read(j, "min_v", v.min_v);
  read(j, "max_v", v.max_v);
  read(j, "max_charge_c", v.max_charge_c);
}

void to_json(nlohmann::json& j, const CurrentProfile& v) {
  j = {{"mcu_sleep", v.mcu_sleep}, {"mcu_active", v.mcu_active}, {"ble_tx", v.ble_tx},
       {"sensor_on", v.sensor_on}, {"accel", v.accel},           {"accel_wakeup", v.accel_wakeup}};
}
void from_json(const nlohmann::json& j, CurrentProfile& v) {
  read(j, "mcu_sleep", v.mcu_sleep);
  read(j, "mcu_active", v.mcu_active);
  read(j, "ble_tx", v.ble_tx);
  read(j, "sensor_on", v.sensor_on);
  read(j, "accel", v.accel);
  read(j, "accel_wakeup", v.accel_wakeup);
}

}  // namespace ecgm::power

namespace ecgm::device {

void to_json(nlohmann::json& j, const Cadence& v) {
  j = {{"fs", v.fs},
       {"raw_rows_per_frame", v.raw_rows_per_frame},
       {"vitals_period_s", v.vitals_period_s},
       {"wake_overhead_s", v.wake_overhead_s},
       {"uart_baud", v.uart_baud}};
}
void from_json(const nlohmann::json& j, Cadence& v) {
  read(j, "fs", v.fs);
  read(j, "raw_rows_per_frame", v.raw_rows_per_frame);
  read(j, "vitals_period_s", v.vitals_period_s);
  read(j, "wake_overhead_s", v.wake_overhead_s);
  read(j, "uart_baud", v.uart_baud);
}

void to_json(nlohmann::json& j, const DeviceConfig& v) {
  j = {{"components", v.components},     {"rails", v.rails},
       {"battery", v.battery},           {"current_profile", v.current},
       {"cadence", v.cadence},           {"uart_capacity", v.uart_capacity}};
}
void from_json(const nlohmann::json& j, DeviceConfig& v) {
  read(j, "components", v.components);
  read(j, "rails", v.rails);
  read(j, "battery", v.battery);
  read(j, "current_profile", v.current);
  read(j, "cadence", v.cadence);
  read(j, "uart_capacity", v.uart_capacity);
}

}  // namespace ecgm::device

namespace ecgm::config {

nlohmann::json parse(const std::string& text, const std::string& origin) {
  try {
    return nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::Configuration, origin + ": " + e.what());
  }
}

nlohmann::json load(const std::string& path) { return parse(io::read_text(path), path); }

}  // namespace ecgm::config
