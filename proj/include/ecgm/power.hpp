#pragma once

#include <string>
#include <vector>

namespace ecgm::power {

struct VoltageRange {
  double min_v;
  double max_v;

  bool contains(double v) const noexcept;
};

struct ComponentSpec {
  std::string name;
  std::vector<VoltageRange> ranges;
};

struct PowerRail {
  double voltage = 0.0;
  std::vector<std::string> components;
};

/// Supply ranges of the six board components (boundaries inclusive).
std::vector<ComponentSpec> board_components();

/// 3.3 V buck-boost, 1.8 V LDO and 4.4 V boost rails as wired on the board.
std::vector<PowerRail> board_rails();

struct RailVerdict {
  double rail_voltage = 0.0;
  std::string component;
  bool pass = false;
  std::vector<VoltageRange> allowed;
};

struct RailReport {
  std::vector<RailVerdict> verdicts;

  bool all_pass() const noexcept;
};

RailReport validate_rails(const std::vector<ComponentSpec>& components,
                          const std::vector<PowerRail>& rails);

/// "1.7-1.9 / 4.0-5.0 V"
std::string format_ranges(const std::vector<VoltageRange>& ranges);

struct BatteryModel {
  double capacity_mah = 120.0;
  double min_v = 2.75;
  double max_v = 4.2;
  double max_charge_c = 0.5;
};

/// Per-state current draw in mA. Only the accelerometer figures are
/// datasheet values; the others are placeholders.
struct CurrentProfile {
  double mcu_sleep = 0.001;
  double mcu_active = 1.0;
  double ble_tx = 6.0;
  double sensor_on = 0.5;
  double accel = 0.002;
  double accel_wakeup = 0.00027;

  double draw(const std::string& state) const;
};

struct DutyShare {
  std::string state;
  double fraction;
};

/// capacity / sum(fraction * draw), in hours.
double battery_runtime(const BatteryModel& battery, const CurrentProfile& profile,
                       const std::vector<DutyShare>& duty);

inline constexpr double kMinProgResistorKohm = 16.7;

struct ChargeCompliance {
  double max_current_ma = 0.0;
  bool resistor_ok = false;
  double implied_current_ma = 0.0;
};

/// implied current = 60 mA * 16.7 kOhm / R, anchored at the compliant point.
ChargeCompliance charge_compliance(const BatteryModel& battery, double prog_resistor_kohm);

}  // namespace ecgm::power
