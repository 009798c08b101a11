#pragma once

// JSON mapping for the configuration types. Field names match the structs;
// missing keys keep their defaults, so partial files are fine.

#include "json.hpp"

#include "ecgm/device.hpp"
#include "ecgm/power.hpp"
#include "ecgm/signal.hpp"

namespace ecgm::signal {
void to_json(nlohmann::json& j, const Wave& v);
void from_json(const nlohmann::json& j, Wave& v);
void to_json(nlohmann::json& j, const EcgTemplate& v);
void from_json(const nlohmann::json& j, EcgTemplate& v);
void to_json(nlohmann::json& j, const NoiseConfig& v);
void from_json(const nlohmann::json& j, NoiseConfig& v);
void to_json(nlohmann::json& j, const AfeConfig& v);
void from_json(const nlohmann::json& j, AfeConfig& v);
}  // namespace ecgm::signal

namespace ecgm::power {
void to_json(nlohmann::json& j, const ComponentSpec& v);
void from_json(const nlohmann::json& j, ComponentSpec& v);
void to_json(nlohmann::json& j, const PowerRail& v);
void from_json(const nlohmann::json& j, PowerRail& v);
void to_json(nlohmann::json& j, const BatteryModel& v);
void from_json(const nlohmann::json& j, BatteryModel& v);
void to_json(nlohmann::json& j, const CurrentProfile& v);
void from_json(const nlohmann::json& j, CurrentProfile& v);
}  // namespace ecgm::power

namespace ecgm::device {
void to_json(nlohmann::json& j, const Cadence& v);
void from_json(const nlohmann::json& j, Cadence& v);
/// Sections: components, rails, battery, current_profile, cadence, uart_capacity.
void to_json(nlohmann::json& j, const DeviceConfig& v);
void from_json(const nlohmann::json& j, DeviceConfig& v);
}  // namespace ecgm::device

namespace ecgm::config {
/// Parse JSON text; syntax errors raise ErrorKind::Configuration.
nlohmann::json parse(const std::string& text, const std::string& origin);
nlohmann::json load(const std::string& path);
}  // namespace ecgm::config
