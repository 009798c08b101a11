#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ecgm/bridge.hpp"
#include "ecgm/codec.hpp"
#include "ecgm/signal.hpp"

namespace ecgm::host {

enum class VitalKind : std::uint8_t { HeartRate, PoorSignal, Temperature, Spo2, Motion };

const char* to_string(VitalKind kind) noexcept;

inline constexpr double kTemperatureStepC = 0.0625;

struct VitalRecord {
  double time_s = 0.0;
  VitalKind kind = VitalKind::HeartRate;
  double value = 0.0;

  bool operator==(const VitalRecord&) const = default;
};

struct QualityReport {
  std::uint64_t packets_ok = 0;
  std::uint64_t checksum_errors = 0;
  std::uint64_t length_errors = 0;
  std::uint64_t row_errors = 0;
  std::uint64_t resyncs = 0;
  std::uint64_t transport_gaps = 0;
  std::uint64_t adc_saturation_count = 0;
  std::uint64_t opaque_rows = 0;

  bool operator==(const QualityReport&) const = default;
};

/// Receiver state: decoder, reassembly cursor, and everything decoded so far.
class Session {
 public:
  explicit Session(double fs = signal::kDefaultFs);

  void ingest(codec::ByteView bytes);
  /// Notifications may span reconnects; a sequence number of 0 starts a new
  /// connection, any other discontinuity counts as one transport gap.
  void ingest(std::span<const ble::Notification> notifications);

  double fs() const noexcept { return ecg_.fs; }
  const signal::SampleStream& ecg() const noexcept { return ecg_; }
  const std::vector<VitalRecord>& vitals() const noexcept { return vitals_; }
  const QualityReport& quality() const noexcept { return quality_; }
  std::uint64_t scalar_rows() const noexcept { return scalar_rows_; }

 private:
  void absorb(const codec::Packet& packet);
  double latest_sample_time() const noexcept;

  codec::StreamDecoder decoder_;
  std::uint32_t next_seq_ = 0;
  bool any_notification_ = false;
  signal::SampleStream ecg_;
  std::vector<VitalRecord> vitals_;
  QualityReport quality_;
  std::uint64_t scalar_rows_ = 0;
};

/// Pan-Tompkins style detector settings.
struct QrsConfig {
  double band_lo_hz = 5.0;
  double band_hi_hz = 15.0;
  double window_s = 0.150;
  double refractory_s = 0.200;
  double min_duration_s = 2.0;
  double t_wave_window_s = 0.360;
};

/// R-peak sample indices, strictly increasing and at least one refractory
/// period apart. Peaks are located on positive-going R waves.
std::vector<std::size_t> detect_qrs(const signal::SampleStream& ecg, double fs,
                                    const QrsConfig& cfg = {});

/// 60 * fs / mean RR (samples).
double hr_from_peaks(std::span<const std::size_t> peaks, double fs);

struct Summary {
  QualityReport quality;
  std::size_t ecg_samples = 0;
  double duration_s = 0.0;
  std::size_t qrs_peaks = 0;
  std::optional<double> mean_hr;
  std::optional<double> device_mean_hr;
  std::size_t vitals_records = 0;
};

Summary summarize(const Session& session, const QrsConfig& cfg = {});

enum class ExportKind : std::uint8_t { EcgCsv, VitalsCsv, SummaryJson };

std::string export_session(const Session& session, ExportKind kind, const QrsConfig& cfg = {});

/// Writes the export to `path`; I/O failures raise ErrorKind::Export.
void export_to_file(const Session& session, ExportKind kind, const std::string& path,
                    const QrsConfig& cfg = {});

}  // namespace ecgm::host
