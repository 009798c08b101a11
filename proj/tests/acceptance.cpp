// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <random>
#include <sstream>
#include <string>

#include "cli.hpp"
#include "ecgm/bridge.hpp"
#include "ecgm/codec.hpp"
#include "ecgm/pipeline.hpp"
#include "ecgm/power.hpp"
#include "ecgm/signal.hpp"
#include "support.hpp"

using namespace ecgm;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

Outcome codec_round_trip() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(101);
  codec::StreamDecoder d;
  int failures = 0;
  for (int i = 0; i < 100000; ++i) {
    const auto p = testing::random_packet(rng);
    const auto ev = d.feed(codec::encode_packet(p));
    if (ev.size() != 1 || ev[0].kind != codec::EventKind::PacketDecoded || !(ev[0].packet == p)) ++failures;
  }
  const double s = seconds_since(t0);
  return {failures == 0 && s < 10.0, fmt("100000 packets, %d failures, %.2f s", failures, s)};
}

Outcome checksum_sensitivity() {
  std::mt19937_64 rng(102);
  long mutations = 0, bad = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto frame = codec::encode_packet(testing::random_packet(rng));
    for (std::size_t pos = 3; pos < frame.size() - 1; ++pos) {
      auto m = frame;
      m[pos] = static_cast<std::uint8_t>(m[pos] + 1 + rng() % 255);
      codec::StreamDecoder d;
      const auto ev = d.feed(m);
      ++mutations;
      bool decoded = false;
      for (const auto& e : ev) decoded = decoded || e.kind == codec::EventKind::PacketDecoded;
      if (ev.empty() || ev.front().kind != codec::EventKind::ChecksumError || decoded) ++bad;
    }
  }
  return {bad == 0, fmt("10000 frames, %ld single-byte mutations, %ld not rejected", mutations, bad)};
}

Outcome resynchronization() {
  std::mt19937_64 rng(103);
  int missed = 0;
  for (int i = 0; i < 1000; ++i) {
    auto g = testing::random_bytes(rng, rng() % 65);
    if (!g.empty() && g.back() == 0xAA) g.back() = static_cast<std::uint8_t>(rng() % 0xAA);
    const auto p = testing::random_packet(rng);
    const auto f = codec::encode_packet(p);
    g.insert(g.end(), f.begin(), f.end());
    codec::StreamDecoder d;
    bool found = false;
    for (const auto& e : d.feed(g)) found = found || (e.kind == codec::EventKind::PacketDecoded && e.packet == p);
    missed += found ? 0 : 1;
  }
  return {missed == 0, fmt("1000 garbage-prefixed frames, %d missed", missed)};
}

Outcome notch_performance() {
  const double fs = 512;
  const auto notch = signal::design_filter(signal::FilterKind::Notch, 50, fs, 30);
  auto through = [&](double f) {
    signal::SampleStream s{fs, signal::Domain::Analog, std::vector<double>(static_cast<std::size_t>(fs * 20))};
    for (std::size_t i = 0; i < s.samples.size(); ++i) s.samples[i] = std::sin(2 * std::numbers::pi * f * static_cast<double>(i) / fs);
    const auto y = signal::apply_filter(notch, s);
    // Last 10 s, past the transient, whole cycles of both tones.
    const auto tail = std::span(y.samples).subspan(static_cast<std::size_t>(fs * 10));
    const auto ref = std::span(s.samples).subspan(static_cast<std::size_t>(fs * 10));
    return 20 * std::log10(testing::tone_amplitude(ref, f, fs) / testing::tone_amplitude(tail, f, fs));
  };
  const double a50 = through(50), a10 = through(10);
  return {a50 >= 40.0 && a10 <= 1.0, fmt("50 Hz attenuated %.1f dB, 10 Hz attenuated %.3f dB", a50, a10)};
}

Outcome adc_contract() {
  signal::AfeConfig cfg;
  const double fsc = cfg.adc_full_scale_mv;
  signal::SampleStream edge{512, signal::Domain::Analog, {fsc, 0.0, 2 * fsc, -2 * fsc}};
  const auto q = signal::adc_quantize(edge, cfg);
  const bool edges = q.stream.samples == std::vector<double>{32767, 0, 32767, -32768} && q.saturations == 2;
  std::mt19937_64 rng(105);
  std::uniform_real_distribution<double> u(-fsc, fsc);
  signal::SampleStream s{512, signal::Domain::Analog, std::vector<double>(10000)};
  for (auto& v : s.samples) v = u(rng);
  const auto r = signal::adc_quantize(s, cfg);
  const double lsb = fsc / 32767.0;
  double worst = 0;
  for (std::size_t i = 0; i < s.samples.size(); ++i) {
    worst = std::max(worst, std::abs(r.stream.samples[i] * lsb - s.samples[i]));
  }
  return {edges && worst <= lsb / 2 * (1 + 1e-12),
          fmt("rails and saturation %s, worst error %.4f LSB over 10000 samples", edges ? "ok" : "WRONG", worst / lsb)};
}

Outcome e2e_hr_recovery() {
  const auto t0 = Clock::now();
  std::string detail;
  bool ok = true;
  for (double hr : {48.0, 60.0, 72.0, 100.0, 150.0}) {
    pipeline::RunConfig cfg;
    cfg.hr_bpm = hr;
    cfg.duration_s = 30;
    const auto r = pipeline::run_e2e(cfg);
    const double got = r.summary.mean_hr.value_or(-1.0);
    ok = ok && std::abs(got - hr) <= 2.0;
    detail += fmt("%g->%.2f ", hr, got);
  }
  const double s = seconds_since(t0);
  ok = ok && s < 60.0;
  return {ok, detail + fmt("bpm, %.2f s", s)};
}

Outcome rails_matrix() {
  // Hand transcription of the supply ranges, checked by interval membership.
  const std::map<std::string, std::vector<std::pair<double, double>>> ranges{
      {"MSP430FR2433", {{1.8, 3.6}}}, {"CC2640R2F", {{1.8, 3.8}}},
      {"BMD101", {{2.97, 3.63}}},     {"ADPD188GG", {{1.7, 1.9}, {4.0, 5.0}}},
      {"ADT7310", {{2.7, 5.5}}},      {"ADXL362", {{1.6, 3.5}}},
  };
  const auto comps = power::board_components();
  std::vector<power::PowerRail> rails;
  for (double v : {3.3, 1.8, 4.4}) {
    power::PowerRail r{v, {}};
    for (const auto& [name, _] : ranges) r.components.push_back(name);
    rails.push_back(r);
  }
  const auto report = power::validate_rails(comps, rails);
  int agree = 0;
  for (const auto& v : report.verdicts) {
    bool in = false;
    for (const auto& [lo, hi] : ranges.at(v.component)) in = in || (v.rail_voltage >= lo && v.rail_voltage <= hi);
    agree += in == v.pass ? 1 : 0;
  }
  return {report.verdicts.size() == 18 && agree == 18,
          fmt("%d of %zu verdicts match", agree, report.verdicts.size())};
}

Outcome battery_arithmetic() {
  power::BatteryModel b;
  power::CurrentProfile p;
  p.mcu_active = 1.0;
  const double h = power::battery_runtime(b, p, {{"mcu_active", 1.0}});
  const auto at = power::charge_compliance(b, 16.7);
  const auto below = power::charge_compliance(b, 16.699);
  const bool ok = h == 120.0 && at.max_current_ma == 60.0 && at.resistor_ok && !below.resistor_ok;
  return {ok, fmt("runtime %g h, max charge %g mA, 16.7 kOhm %s, 16.699 kOhm %s", h, at.max_current_ma,
                  at.resistor_ok ? "pass" : "fail", below.resistor_ok ? "pass" : "fail")};
}

Outcome transport_identity() {
  std::mt19937_64 rng(109);
  int bad = 0;
  for (std::size_t mtu : {23u, 27u, 185u, 251u}) {
    for (int i = 0; i < 1000; ++i) {
      const auto x = testing::random_bytes(rng, rng() % 10001);
      const auto notes = ble::segment(x, mtu, 0);
      bool sizes = true;
      for (std::size_t k = 0; k < notes.size(); ++k) {
        const auto n = notes[k].payload.size();
        sizes = sizes && n <= mtu - ble::kAttOverhead && (k + 1 == notes.size() || n == mtu - ble::kAttOverhead);
      }
      if (!sizes || ble::reassemble(notes) != x) ++bad;
    }
  }
  return {bad == 0, fmt("4 MTUs x 1000 streams, %d mismatches", bad)};
}

Outcome flow_control() {
  pipeline::RunConfig cfg;
  cfg.duration_s = 8;
  cfg.scenario = pipeline::parse_scenario("t=2 set_cts 0\nt=3.5 set_cts 1\nt=5 set_cts 0\nt=6 set_cts 1\n");
  const auto r = pipeline::run_e2e(cfg);
  std::size_t while_low = 0, flushed = 0;
  for (const auto& e : r.emissions) {
    const bool low = (e.time > 2 + 1e-9 && e.time < 3.5 - 1e-9) || (e.time > 5 + 1e-9 && e.time < 6 - 1e-9);
    if (low) while_low += e.bytes;
    if (std::abs(e.time - 3.5) < 1e-9 || std::abs(e.time - 6) < 1e-9) flushed += e.bytes;
  }
  const bool full = r.frames_emitted == r.frames_generated && r.frames_dropped == 0;
  const bool ledger = r.bridge.brts_pulses == r.notifications.size();
  return {while_low == 0 && flushed > 0 && full && ledger,
          fmt("%zu bytes while low, %zu flushed on rising edges, %llu/%llu frames out, %llu BRTS pulses for %zu "
              "notifications",
              while_low, flushed, static_cast<unsigned long long>(r.frames_emitted),
              static_cast<unsigned long long>(r.frames_generated),
              static_cast<unsigned long long>(r.bridge.brts_pulses), r.notifications.size())};
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()};
}

Outcome reproducibility() {
  const auto base = fs::temp_directory_path() / ("ecgm-accept-" + std::to_string(std::random_device{}()));
  std::istringstream in;
  std::ostringstream out, err;
  int codes = 0;
  for (const char* d : {"a", "b"}) {
    codes += ecgm::cli::run({"e2e", "--hr", "72", "--duration", "10", "--seed", "1", "--out", (base / d).string()},
                            in, out, err);
  }
  int same = 0, total = 0;
  for (const char* f : {"run.json", "ecg.csv", "vitals.csv", "summary.json", "notifications.csv"}) {
    const auto a = slurp(base / "a" / f);
    ++total;
    same += !a.empty() && a == slurp(base / "b" / f) ? 1 : 0;
  }
  std::error_code ec;
  fs::remove_all(base, ec);
  return {codes == 0 && same == total, fmt("%d of %d output files byte-identical", same, total)};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"codec round trip", codec_round_trip},
      {"checksum sensitivity", checksum_sensitivity},
      {"resynchronization", resynchronization},
      {"notch performance", notch_performance},
      {"ADC contract", adc_contract},
      {"end-to-end HR recovery", e2e_hr_recovery},
      {"rails matrix", rails_matrix},
      {"battery arithmetic", battery_arithmetic},
      {"transport identity", transport_identity},
      {"flow-control ledger", flow_control},
      {"reproducibility", reproducibility},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    failed += o.pass ? 0 : 1;
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
