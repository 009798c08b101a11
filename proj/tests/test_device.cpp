#include "doctest.h"

#include <algorithm>
#include <array>
#include <map>
#include <cmath>
#include <random>

#include "ecgm/codec.hpp"
#include "ecgm/device.hpp"
#include "ecgm/error.hpp"
#include "ecgm/power.hpp"

using namespace ecgm;
using namespace ecgm::device;
using ecgm::codec::Bytes;
using ecgm::codec::DataRow;

namespace {

ErrorKind kind_of(const auto& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an ecgm::Error");
  return ErrorKind::Length;
}

signal::SampleStream axis(std::vector<double> v, double fs = 100) {
  return {fs, signal::Domain::Analog, std::move(v)};
}

// Mirrors the energy rule by hand: sleep floor plus the per-wake surcharge.
double expected_energy(const power::CurrentProfile& c, double t, double active_s, double tx_s) {
  return (c.mcu_sleep * t + (c.mcu_active - c.mcu_sleep) * active_s + c.ble_tx * tx_s) / 3600.0;
}

}  // namespace

TEST_CASE("idle step costs only the sleep draw") {
  DeviceModel dev;
  const auto r = dev.step(1.0);
  CHECK(r.emitted.empty());
  CHECK(r.energy_mah == doctest::Approx(0.001 / 3600.0).epsilon(1e-12));
  CHECK(dev.state() == McuState::Sleep);
  CHECK(r.events.empty());
}

TEST_CASE("one RAW_ECG row is framed and emitted") {
  DeviceModel dev;
  dev.push_row(0.0, DataRow::raw_ecg(-200));
  const auto r = dev.step(0.1);
  CHECK(r.emitted == Bytes{0xAA, 0xAA, 0x04, 0x80, 0x02, 0xFF, 0x38, 0x46});
  CHECK(dev.brts_pulses() == 1);
  CHECK(dev.state() == McuState::Sleep);
  // Interrupt, wake, buffer, emit, BRTS, sleep in that order.
  REQUIRE(r.events.size() == 6);
  CHECK(r.events[0].kind == EventKind::Interrupt);
  CHECK(r.events[1].kind == EventKind::Wake);
  CHECK(r.events[2].kind == EventKind::FrameBuffered);
  CHECK(r.events[3].kind == EventKind::FrameEmitted);
  CHECK(r.events[4].kind == EventKind::BrtsPulse);
  CHECK(r.events[5].kind == EventKind::Sleep);
  const auto& c = dev.config().current;
  const double tx_s = 8 * 10.0 / 57600.0;
  CHECK(r.energy_mah == doctest::Approx(expected_energy(c, 0.1, 200e-6 + tx_s, tx_s)).epsilon(1e-12));
}

TEST_CASE("BCTS low holds the frame") {
  DeviceModel dev;
  dev.set_cts(false);
  dev.push_row(0.0, DataRow::raw_ecg(-200));
  const auto r = dev.step(0.1);
  CHECK(r.emitted.empty());
  CHECK(dev.buffered_bytes() == 8);
  CHECK(dev.buffered_frames() == 1);
  CHECK(dev.brts_pulses() == 0);

  dev.set_cts(true);
  const auto f = dev.step(0.01);
  CHECK(f.emitted == Bytes{0xAA, 0xAA, 0x04, 0x80, 0x02, 0xFF, 0x38, 0x46});
  CHECK(dev.buffered_bytes() == 0);
}

TEST_CASE("EN low also holds output") {
  DeviceModel dev;
  dev.set_en(false);
  dev.push_row(0.0, DataRow::heart_rate(70));
  CHECK(dev.step(0.5).emitted.empty());
  CHECK(dev.buffered_frames() == 1);
}

TEST_CASE("frames carry 16 raw rows and vitals once per second") {
  DeviceConfig cfg;
  DeviceModel dev(cfg);
  Vitals v;
  v.enabled = true;
  v.heart_rate = 70;
  dev.set_vitals(v);
  std::vector<double> codes(512 * 2, 100.0);
  dev.push_ecg(codes);
  const auto r = dev.step(2.0 + 16.0 / 512.0);
  codec::StreamDecoder d;
  std::size_t raw = 0, hr = 0, temp = 0;
  for (const auto& e : d.feed(r.emitted)) {
    REQUIRE(e.kind == codec::EventKind::PacketDecoded);
    std::size_t raw_here = 0;
    for (const auto& row : e.packet.rows) {
      raw_here += row.code == codec::code::kRawEcg;
      hr += row.code == codec::code::kHeartRate;
      temp += row.code == codec::code::kTemperature;
    }
    REQUIRE(raw_here <= 16);
    raw += raw_here;
  }
  CHECK(raw == codes.size());
  CHECK(hr == 2);
  CHECK(temp == 2);
  CHECK(dev.pending_rows() == 0);
}

TEST_CASE("overflow drops the oldest frame") {
  DeviceConfig cfg;
  cfg.uart_capacity = 200;
  DeviceModel dev(cfg);
  dev.set_cts(false);
  std::vector<double> codes(512, 1.0);
  dev.push_ecg(codes);
  const auto r = dev.step(1.1);
  std::size_t overflows = 0;
  for (const auto& e : r.events) overflows += e.kind == EventKind::Overflow;
  CHECK(overflows > 0);
  CHECK(dev.frames_dropped() == overflows);
  CHECK(dev.buffered_bytes() <= 200);
  CHECK(dev.frames_generated() == 32);
  CHECK(dev.buffered_frames() + dev.frames_dropped() == dev.frames_generated());
}

TEST_CASE("property: flow control holds everything while BCTS is low") {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 20; ++trial) {
    DeviceConfig cfg;
    cfg.uart_capacity = 1u << 20;
    DeviceModel dev(cfg);
    Vitals v;
    v.enabled = true;
    dev.set_vitals(v);
    dev.set_cts(false);
    std::vector<double> codes(512 * 3, 5.0);
    dev.push_ecg(codes);
    std::size_t emitted = 0;
    while (dev.clock() < 3.2) emitted += dev.step(0.001 + static_cast<double>(rng() % 1000) / 4000.0).emitted.size();
    CHECK(emitted == 0);
    CHECK(dev.buffered_frames() == dev.frames_generated());
    CHECK(dev.brts_pulses() == 0);
  }
}

TEST_CASE("property: energy is invariant to step partition") {
  for (int trial = 0; trial < 20; ++trial) {
    auto run = [&](bool single) {
      DeviceModel dev;
      Vitals v;
      v.enabled = true;
      dev.set_vitals(v);
      std::vector<double> codes(512 * 4, 7.0);
      dev.push_ecg(codes);
      if (single) {
        dev.step(4.5);
      } else {
        std::mt19937_64 r2(static_cast<std::uint64_t>(trial));
        double left = 4.5;
        while (left > 1e-12) {
          const double dt = std::min(left, 0.0005 + static_cast<double>(r2() % 1000) / 2000.0);
          dev.step(dt);
          left -= dt;
        }
      }
      return std::pair{dev.energy_used_mah(), dev.frames_emitted()};
    };
    const auto a = run(true);
    const auto b = run(false);
    CHECK(b.first == doctest::Approx(a.first).epsilon(1e-9));
    CHECK(b.second == a.second);
  }
}

TEST_CASE("property: state discipline") {
  std::mt19937_64 rng(23);
  DeviceModel dev;
  Vitals v;
  v.enabled = true;
  dev.set_vitals(v);
  std::vector<double> codes(512 * 5, 3.0);
  dev.push_ecg(codes);
  while (dev.clock() < 5.0) {
    if (rng() % 7 == 0) dev.set_cts(rng() % 2);
    const auto r = dev.step(0.001 + static_cast<double>(rng() % 100) / 500.0);
    bool active = false, interrupt_first = true;
    std::size_t emitted = 0, pulses = 0;
    for (std::size_t i = 0; i < r.events.size(); ++i) {
      const auto& e = r.events[i];
      if (e.kind == EventKind::Wake) {
        active = true;
        interrupt_first = interrupt_first && i > 0 && r.events[i - 1].kind == EventKind::Interrupt;
      }
      if (e.kind == EventKind::FrameEmitted) emitted += e.bytes;
      if (e.kind == EventKind::BrtsPulse) {
        ++pulses;
        REQUIRE(i > 0);
        REQUIRE(r.events[i - 1].kind == EventKind::FrameEmitted);
      }
    }
    REQUIRE(interrupt_first);
    REQUIRE(emitted == r.emitted.size());
    if (!r.emitted.empty()) REQUIRE(active);
    REQUIRE(r.active_s >= 0.0);
    REQUIRE(dev.state() == McuState::Sleep);
  }
}

TEST_CASE("device config validation") {
  DeviceConfig cfg;
  cfg.cadence.fs = 0;
  CHECK(kind_of([&] { DeviceModel d(cfg); }) == ErrorKind::Parameter);
  cfg = {};
  cfg.uart_capacity = 10;
  CHECK(kind_of([&] { DeviceModel d(cfg); }) == ErrorKind::Parameter);
  cfg = {};
  cfg.current.ble_tx = -1;
  CHECK(kind_of([&] { DeviceModel d(cfg); }) == ErrorKind::Parameter);
  DeviceModel d;
  CHECK(kind_of([&] { d.step(0); }) == ErrorKind::Parameter);
}

TEST_CASE("motion_gate examples") {
  std::vector<double> zero(500, 0.0), one(500, 1.0), toggle(500);
  for (std::size_t i = 0; i < toggle.size(); ++i) toggle[i] = i % 2 ? 0.5 : -0.5;
  const auto still = motion_gate(axis(zero), axis(zero), axis(one), 1.0, 0.1);
  CHECK(still.size() == 5);
  for (bool f : still) CHECK_FALSE(f);
  const auto moving = motion_gate(axis(toggle), axis(zero), axis(one), 1.0, 0.1);
  CHECK(moving.size() == 5);
  for (bool f : moving) CHECK(f);
  CHECK(motion_gate(axis({}), axis({}), axis({}), 1.0, 0.1).empty());
  CHECK(kind_of([&] { motion_gate(axis(zero), axis(zero), axis(one), 0.01, 0.1); }) == ErrorKind::Parameter);
  CHECK(kind_of([&] { motion_gate(axis(zero), axis({1.0}), axis(one), 1.0, 0.1); }) == ErrorKind::Parameter);
}

TEST_CASE("rails examples") {
  const auto comps = power::board_components();
  auto verdict = [&](double v, const std::string& name) {
    return power::validate_rails(comps, {{v, {name}}}).verdicts.at(0).pass;
  };
  CHECK(verdict(3.3, "BMD101"));
  CHECK_FALSE(verdict(3.3, "ADPD188GG"));
  CHECK(verdict(1.8, "MSP430FR2433"));
  CHECK(kind_of([&] { power::validate_rails(comps, {{3.3, {"NOPE"}}}); }) == ErrorKind::Configuration);
  CHECK(power::validate_rails(comps, power::board_rails()).all_pass());
}

TEST_CASE("rails matrix matches the hand-derived verdicts") {
  const std::map<std::string, std::array<bool, 3>> truth{
      // 3.3, 1.8, 4.4
      {"BMD101", {true, false, false}},     {"ADPD188GG", {false, true, true}},
      {"ADT7310", {true, false, true}},     {"ADXL362", {true, true, false}},
      {"MSP430FR2433", {true, true, false}}, {"CC2640R2F", {true, true, false}},
  };
  const auto comps = power::board_components();
  const std::array<double, 3> volts{3.3, 1.8, 4.4};
  std::vector<power::PowerRail> rails;
  for (double v : volts) {
    power::PowerRail r{v, {}};
    for (const auto& c : comps) r.components.push_back(c.name);
    rails.push_back(r);
  }
  const auto report = power::validate_rails(comps, rails);
  REQUIRE(report.verdicts.size() == 18);
  for (const auto& v : report.verdicts) {
    const auto idx = static_cast<std::size_t>(std::find(volts.begin(), volts.end(), v.rail_voltage) - volts.begin());
    CHECK_MESSAGE(v.pass == truth.at(v.component)[idx], v.component, " @ ", v.rail_voltage);
  }
}

TEST_CASE("range formatting") {
  CHECK(power::format_ranges({{1.7, 1.9}, {4.0, 5.0}}) == "1.7-1.9 / 4.0-5.0 V");
  CHECK(power::format_ranges({{2.97, 3.63}}) == "2.97-3.63 V");
}

TEST_CASE("battery examples") {
  power::BatteryModel b;
  power::CurrentProfile p;
  p.mcu_active = 1.0;
  CHECK(power::battery_runtime(b, p, {{"mcu_active", 1.0}}) == 120.0);
  p.mcu_active = 10.0;
  p.mcu_sleep = 0.1;
  CHECK(power::battery_runtime(b, p, {{"mcu_active", 0.1}, {"mcu_sleep", 0.9}}) ==
        doctest::Approx(120.0 / 1.09).epsilon(1e-12));
  power::CurrentProfile off{0, 0, 0, 0, 0, 0};
  CHECK(kind_of([&] { power::battery_runtime(b, off, {{"mcu_sleep", 1.0}}); }) == ErrorKind::UndefinedRuntime);
  CHECK(kind_of([&] { power::battery_runtime(b, p, {{"mcu_sleep", 0.5}}); }) == ErrorKind::Parameter);
  CHECK(kind_of([&] { power::battery_runtime(b, p, {{"warp_drive", 1.0}}); }) == ErrorKind::Configuration);
}

TEST_CASE("charge compliance examples") {
  power::BatteryModel b;
  CHECK(power::charge_compliance(b, 16.7).max_current_ma == 60.0);
  const auto ok = power::charge_compliance(b, 16.7);
  CHECK(ok.resistor_ok);
  CHECK(ok.implied_current_ma == doctest::Approx(60.0));
  CHECK_FALSE(power::charge_compliance(b, 10.0).resistor_ok);
  CHECK_FALSE(power::charge_compliance(b, 16.699).resistor_ok);
  CHECK(power::charge_compliance(b, 33.4).implied_current_ma == doctest::Approx(30.0));
  CHECK(kind_of([&] { power::charge_compliance(b, 0.0); }) == ErrorKind::Parameter);
}
