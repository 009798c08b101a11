#include "ecgm/power.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "ecgm/error.hpp"

namespace ecgm::power {

namespace {
constexpr double kBoundaryTolerance = 1e-9;
}

bool VoltageRange::contains(double v) const noexcept {
  return v >= min_v - kBoundaryTolerance && v <= max_v + kBoundaryTolerance;
}

std::vector<ComponentSpec> board_components() {
  return {
      {"MSP430FR2433", {{1.8, 3.6}}},
      {"CC2640R2F", {{1.8, 3.8}}},
      {"BMD101", {{3.3 * 0.9, 3.3 * 1.1}}},
      {"ADPD188GG", {{1.7, 1.9}, {4.0, 5.0}}},
      {"ADT7310", {{2.7, 5.5}}},
      {"ADXL362", {{1.6, 3.5}}},
  };
}

std::vector<PowerRail> board_rails() {
  return {
      {3.3, {"MSP430FR2433", "CC2640R2F", "BMD101", "ADT7310", "ADXL362"}},
      {1.8, {"ADPD188GG"}},
      {4.4, {"ADPD188GG"}},
  };
}

bool RailReport::all_pass() const noexcept {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const auto& v) { return v.pass; });
}

RailReport validate_rails(const std::vector<ComponentSpec>& components,
                          const std::vector<PowerRail>& rails) {
  for (const auto& c : components) {
    if (c.ranges.empty()) {
      throw Error(ErrorKind::Configuration, "component " + c.name + " has no voltage range");
    }
    for (const auto& r : c.ranges) {
      if (!(r.min_v < r.max_v)) {
        throw Error(ErrorKind::Configuration, "component " + c.name + " has an empty range");
      }
    }
  }
  RailReport report;
  for (const auto& rail : rails) {
    if (!(rail.voltage > 0.0)) {
      throw Error(ErrorKind::Configuration, "rail voltage must be positive");
    }
    for (const auto& name : rail.components) {
      const auto it = std::find_if(components.begin(), components.end(),
                                   [&](const ComponentSpec& c) { return c.name == name; });
      if (it == components.end()) {
        throw Error(ErrorKind::Configuration, "unknown component '" + name + "' on " +
                                                  std::to_string(rail.voltage) + " V rail");
      }
      const bool pass = std::any_of(it->ranges.begin(), it->ranges.end(),
                                    [&](const VoltageRange& r) { return r.contains(rail.voltage); });
      report.verdicts.push_back({rail.voltage, name, pass, it->ranges});
    }
  }
  return report;
}

std::string format_ranges(const std::vector<VoltageRange>& ranges) {
  auto volts = [](double v) {
    std::ostringstream os;
    os << std::fixed;
    os.precision(std::abs(v * 10 - std::round(v * 10)) < 1e-9 ? 1 : 2);
    os << v;
    return os.str();
  };
  std::string out;
  for (std::size_t i = 0; i < ranges.size(); ++i) {
    if (i) out += " / ";
    out += volts(ranges[i].min_v) + "-" + volts(ranges[i].max_v);
  }
  return out + " V";
}

double CurrentProfile::draw(const std::string& state) const {
  if (state == "mcu_sleep") return mcu_sleep;
  if (state == "mcu_active") return mcu_active;
  if (state == "ble_tx") return ble_tx;
  if (state == "sensor_on") return sensor_on;
  if (state == "accel") return accel;
  if (state == "accel_wakeup") return accel_wakeup;
  throw Error(ErrorKind::Configuration, "unknown power state '" + state + "'");
}

double battery_runtime(const BatteryModel& battery, const CurrentProfile& profile,
                       const std::vector<DutyShare>& duty) {
  if (!(battery.capacity_mah > 0.0)) {
    throw Error(ErrorKind::Parameter, "battery capacity must be positive");
  }
  double fraction_sum = 0.0, average = 0.0;
  for (const auto& share : duty) {
    if (!(share.fraction >= 0.0)) throw Error(ErrorKind::Parameter, "duty fractions must be >= 0");
    const double draw = profile.draw(share.state);
    if (!(draw >= 0.0)) throw Error(ErrorKind::Parameter, "current draws must be >= 0");
    fraction_sum += share.fraction;
    average += share.fraction * draw;
  }
  if (std::abs(fraction_sum - 1.0) > 1e-9) {
    throw Error(ErrorKind::Parameter,
                "duty fractions sum to " + std::to_string(fraction_sum) + ", not 1");
  }
  if (!(average > 0.0)) {
    throw Error(ErrorKind::UndefinedRuntime, "average current draw is zero; runtime undefined");
  }
  return battery.capacity_mah / average;
}

ChargeCompliance charge_compliance(const BatteryModel& battery, double prog_resistor_kohm) {
  if (!(prog_resistor_kohm > 0.0)) {
    throw Error(ErrorKind::Parameter, "programming resistor must be positive");
  }
  ChargeCompliance out;
  out.max_current_ma = battery.max_charge_c * battery.capacity_mah;
  out.resistor_ok = prog_resistor_kohm >= kMinProgResistorKohm;
  out.implied_current_ma = 60.0 * (kMinProgResistorKohm / prog_resistor_kohm);
  return out;
}

}  // namespace ecgm::power
