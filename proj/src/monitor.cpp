#include "ecgm/monitor.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ecgm/error.hpp"
#include "ecgm/io.hpp"
#include "json.hpp"

namespace ecgm::host {

const char* to_string(VitalKind kind) noexcept {
  switch (kind) {
    case VitalKind::HeartRate: return "heart_rate";
    case VitalKind::PoorSignal: return "poor_signal";
    case VitalKind::Temperature: return "temperature";
    case VitalKind::Spo2: return "spo2";
    case VitalKind::Motion: return "motion";
  }
  return "?";
}

Session::Session(double fs) : ecg_{fs, signal::Domain::Digital, {}} {
  if (!(fs > 0.0)) throw Error(ErrorKind::Parameter, "session sample rate must be positive");
}

double Session::latest_sample_time() const noexcept {
  return ecg_.samples.empty() ? 0.0 : static_cast<double>(ecg_.samples.size() - 1) / ecg_.fs;
}

void Session::absorb(const codec::Packet& packet) {
  for (const auto& row : packet.rows) {
    std::optional<VitalRecord> rec;
    const double t = latest_sample_time();
    switch (row.code) {
      case codec::code::kRawEcg: {
        const auto v = row.as_int();
        if (v >= 32767 || v <= -32768) ++quality_.adc_saturation_count;
        ecg_.samples.push_back(static_cast<double>(v));
        continue;
      }
      case codec::code::kPoorSignal:
        rec = VitalRecord{t, VitalKind::PoorSignal, static_cast<double>(row.as_int())};
        break;
      case codec::code::kHeartRate:
        rec = VitalRecord{t, VitalKind::HeartRate, static_cast<double>(row.as_int())};
        break;
      case codec::code::kTemperature: {
        const double c = row.as_int() / 100.0;
        rec = VitalRecord{t, VitalKind::Temperature,
                          std::round(c / kTemperatureStepC) * kTemperatureStepC};
        break;
      }
      case codec::code::kSpo2:
        rec = VitalRecord{t, VitalKind::Spo2, static_cast<double>(row.as_int())};
        break;
      case codec::code::kMotionFlag:
        rec = VitalRecord{t, VitalKind::Motion, row.as_int() != 0 ? 1.0 : 0.0};
        break;
      default:
        ++quality_.opaque_rows;
        continue;
    }
    ++scalar_rows_;
    vitals_.push_back(*rec);
  }
}

void Session::ingest(codec::ByteView bytes) {
  for (const auto& ev : decoder_.feed(bytes)) {
    if (ev.kind == codec::EventKind::PacketDecoded) absorb(ev.packet);
  }
  const auto& s = decoder_.stats();
  quality_.packets_ok = s.packets_ok;
  quality_.checksum_errors = s.checksum_errors;
  quality_.length_errors = s.length_errors;
  quality_.row_errors = s.row_errors;
  quality_.resyncs = s.resyncs;
}

void Session::ingest(std::span<const ble::Notification> notifications) {
  codec::Bytes run;
  for (const auto& note : notifications) {
    if (any_notification_ && note.seq != next_seq_ && note.seq != 0) ++quality_.transport_gaps;
    any_notification_ = true;
    next_seq_ = note.seq + 1;
    run.insert(run.end(), note.payload.begin(), note.payload.end());
  }
  ingest(run);
}

namespace {

std::vector<double> derivative(std::span<const double> x, double fs) {
  // Five-point derivative (2x[n] + x[n-1] - x[n-3] - 2x[n-4]) * fs / 8.
  std::vector<double> d(x.size(), 0.0);
  auto at = [&](std::size_t n, std::size_t back) { return n >= back ? x[n - back] : 0.0; };
  for (std::size_t n = 0; n < x.size(); ++n) {
    d[n] = (2.0 * at(n, 0) + at(n, 1) - at(n, 3) - 2.0 * at(n, 4)) * fs / 8.0;
  }
  return d;
}

std::vector<double> moving_integral(std::span<const double> x, std::size_t window) {
  std::vector<double> out(x.size(), 0.0);
  double acc = 0.0;
  for (std::size_t n = 0; n < x.size(); ++n) {
    acc += x[n];
    if (n >= window) acc -= x[n - window];
    out[n] = acc / static_cast<double>(window);
  }
  return out;
}

double max_abs_slope(std::span<const double> slope, std::size_t center, std::size_t half) {
  const std::size_t lo = center > half ? center - half : 0;
  const std::size_t hi = std::min(slope.size(), center + half + 1);
  double m = 0.0;
  for (std::size_t i = lo; i < hi; ++i) m = std::max(m, std::abs(slope[i]));
  return m;
}

}  // namespace

std::vector<std::size_t> detect_qrs(const signal::SampleStream& ecg, double fs,
                                    const QrsConfig& cfg) {
  if (!(fs > 0.0)) throw Error(ErrorKind::Parameter, "sampling rate must be positive");
  const std::size_t n = ecg.size();
  if (static_cast<double>(n) < cfg.min_duration_s * fs) {
    throw Error(ErrorKind::InsufficientData,
                "QRS detection needs at least " + std::to_string(cfg.min_duration_s) +
                    " s of samples, got " + std::to_string(static_cast<double>(n) / fs) + " s");
  }

  using signal::FilterKind;
  signal::SampleStream band{fs, signal::Domain::Analog, ecg.samples};
  band = signal::apply_filter(signal::design_filter(FilterKind::Highpass, cfg.band_lo_hz, fs), band);
  band = signal::apply_filter(signal::design_filter(FilterKind::Lowpass, cfg.band_hi_hz, fs), band);

  const auto slope = derivative(band.samples, fs);
  std::vector<double> squared(slope.size());
  std::transform(slope.begin(), slope.end(), squared.begin(), [](double v) { return v * v; });
  const auto window = std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(cfg.window_s * fs)));
  const auto integ = moving_integral(squared, window);

  const auto refractory = static_cast<std::size_t>(std::ceil(cfg.refractory_s * fs));
  const auto t_wave_limit = static_cast<std::size_t>(std::llround(cfg.t_wave_window_s * fs));
  const auto slope_half = static_cast<std::size_t>(std::llround(0.075 * fs));

  // Learning phase over the first two seconds.
  const auto learn = std::min(n, static_cast<std::size_t>(2.0 * fs));
  const double learn_max = *std::max_element(integ.begin(), integ.begin() + static_cast<std::ptrdiff_t>(learn));
  const double learn_mean =
      std::accumulate(integ.begin(), integ.begin() + static_cast<std::ptrdiff_t>(learn), 0.0) /
      static_cast<double>(learn);
  double spki = 0.25 * learn_max;
  double npki = 0.5 * learn_mean;
  auto threshold = [&] { return npki + 0.25 * (spki - npki); };

  struct Candidate {
    std::size_t index;
    double value;
  };
  std::vector<Candidate> candidates;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (integ[i] > 0.0 && integ[i] > integ[i - 1] && integ[i] >= integ[i + 1]) {
      candidates.push_back({i, integ[i]});
    }
  }

  std::vector<std::size_t> qrs;  // indices into the integrated signal
  std::vector<double> rr;
  double last_slope = 0.0;
  std::size_t last_candidate_pos = 0;  // candidates already examined for searchback

  auto accept = [&](std::size_t idx, double value, bool from_searchback) {
    if (!qrs.empty()) {
      rr.push_back(static_cast<double>(idx - qrs.back()));
      if (rr.size() > 8) rr.erase(rr.begin());
    }
    qrs.push_back(idx);
    last_slope = max_abs_slope(slope, idx > window / 2 ? idx - window / 2 : 0, slope_half);
    spki = from_searchback ? 0.25 * value + 0.75 * spki : 0.125 * value + 0.875 * spki;
  };

  for (std::size_t c = 0; c < candidates.size(); ++c) {
    const auto [idx, value] = candidates[c];

    // Searchback for a missed beat when the gap grows past 1.66 mean RR.
    if (rr.size() >= 2 && !qrs.empty()) {
      const double mean_rr = std::accumulate(rr.begin(), rr.end(), 0.0) / static_cast<double>(rr.size());
      if (static_cast<double>(idx - qrs.back()) > 1.66 * mean_rr) {
        const double thr2 = 0.5 * threshold();
        std::optional<Candidate> best;
        for (std::size_t k = last_candidate_pos; k < c; ++k) {
          const auto& cand = candidates[k];
          if (cand.index <= qrs.back() + refractory || idx < cand.index + refractory) continue;
          if (cand.value > thr2 && (!best || cand.value > best->value)) best = cand;
        }
        if (best) accept(best->index, best->value, true);
      }
    }
    last_candidate_pos = c;

    if (!qrs.empty() && idx < qrs.back() + refractory) continue;
    if (value > threshold()) {
      if (!qrs.empty() && idx - qrs.back() < t_wave_limit) {
        const double s = max_abs_slope(slope, idx > window / 2 ? idx - window / 2 : 0, slope_half);
        if (s < 0.5 * last_slope) {
          npki = 0.125 * value + 0.875 * npki;
          continue;
        }
      }
      accept(idx, value, false);
    } else {
      npki = 0.125 * value + 0.875 * npki;
    }
  }

  // Map each integrator peak back to the R wave: the integration window
  // trails the QRS, so search the preceding window plus filter delay.
  const auto reach = window + static_cast<std::size_t>(std::llround(0.05 * fs));
  std::vector<std::size_t> peaks;
  for (std::size_t idx : qrs) {
    const std::size_t lo = idx > reach ? idx - reach : 0;
    std::size_t best = lo;
    for (std::size_t i = lo; i <= idx && i < n; ++i) {
      if (ecg.samples[i] > ecg.samples[best]) best = i;
    }
    if (!peaks.empty() && best < peaks.back() + refractory) {
      if (ecg.samples[best] > ecg.samples[peaks.back()]) peaks.back() = best;
      continue;
    }
    peaks.push_back(best);
  }
  return peaks;
}

double hr_from_peaks(std::span<const std::size_t> peaks, double fs) {
  if (!(fs > 0.0)) throw Error(ErrorKind::Parameter, "sampling rate must be positive");
  if (peaks.size() < 2) {
    throw Error(ErrorKind::InsufficientData, "heart rate needs at least two peaks");
  }
  const double span = static_cast<double>(peaks.back()) - static_cast<double>(peaks.front());
  const double mean_rr = span / static_cast<double>(peaks.size() - 1);
  if (!(mean_rr > 0.0)) throw Error(ErrorKind::Parameter, "peaks must be increasing");
  return 60.0 * fs / mean_rr;
}

Summary summarize(const Session& session, const QrsConfig& cfg) {
  Summary s;
  s.quality = session.quality();
  s.ecg_samples = session.ecg().size();
  s.duration_s = session.ecg().duration();
  s.vitals_records = session.vitals().size();
  try {
    const auto peaks = detect_qrs(session.ecg(), session.fs(), cfg);
    s.qrs_peaks = peaks.size();
    if (peaks.size() >= 2) s.mean_hr = hr_from_peaks(peaks, session.fs());
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::InsufficientData) throw;
  }
  double hr_sum = 0.0;
  std::size_t hr_count = 0;
  for (const auto& v : session.vitals()) {
    if (v.kind == VitalKind::HeartRate) {
      hr_sum += v.value;
      ++hr_count;
    }
  }
  if (hr_count > 0) s.device_mean_hr = hr_sum / static_cast<double>(hr_count);
  return s;
}

std::string export_session(const Session& session, ExportKind kind, const QrsConfig& cfg) {
  switch (kind) {
    case ExportKind::EcgCsv: {
      std::string out = "index,time_s,adc_code\n";
      const auto& ecg = session.ecg();
      for (std::size_t i = 0; i < ecg.size(); ++i) {
        out += std::to_string(i) + ',' + io::format_time(static_cast<double>(i) / ecg.fs) + ',' +
               std::to_string(static_cast<long>(ecg.samples[i])) + '\n';
      }
      return out;
    }
    case ExportKind::VitalsCsv: {
      std::string out = "time_s,kind,value\n";
      for (const auto& v : session.vitals()) {
        out += io::format_time(v.time_s) + ',' + to_string(v.kind) + ',' + io::format_number(v.value) + '\n';
      }
      return out;
    }
    case ExportKind::SummaryJson: {
      const auto s = summarize(session, cfg);
      const auto& q = s.quality;
      nlohmann::ordered_json j;
      j["packets_ok"] = q.packets_ok;
      j["checksum_errors"] = q.checksum_errors;
      j["length_errors"] = q.length_errors;
      j["row_errors"] = q.row_errors;
      j["resyncs"] = q.resyncs;
      j["transport_gaps"] = q.transport_gaps;
      j["adc_saturation_count"] = q.adc_saturation_count;
      j["ecg_samples"] = s.ecg_samples;
      j["duration_s"] = s.duration_s;
      j["qrs_peaks"] = s.qrs_peaks;
      j["mean_hr"] = s.mean_hr ? nlohmann::ordered_json(*s.mean_hr) : nlohmann::ordered_json(nullptr);
      j["device_mean_hr"] =
          s.device_mean_hr ? nlohmann::ordered_json(*s.device_mean_hr) : nlohmann::ordered_json(nullptr);
      j["vitals_records"] = s.vitals_records;
      return j.dump(2) + "\n";
    }
  }
  return {};
}

void export_to_file(const Session& session, ExportKind kind, const std::string& path,
                    const QrsConfig& cfg) {
  io::write_file(path, export_session(session, kind, cfg));
}

}  // namespace ecgm::host
