#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace ecgm::signal {

enum class Domain : std::uint8_t { Analog, Digital };

inline constexpr double kAdcMaxCode = 32767.0;
inline constexpr double kAdcMinCode = -32768.0;
inline constexpr double kDefaultFs = 512.0;

/// Samples in mV (analog) or 16-bit ADC codes held as integral doubles (digital).
struct SampleStream {
  double fs = kDefaultFs;
  Domain domain = Domain::Analog;
  std::vector<double> samples;

  std::size_t size() const noexcept { return samples.size(); }
  double duration() const noexcept { return static_cast<double>(samples.size()) / fs; }
};

/// One Gaussian wave of the beat, placed relative to the R peak.
struct Wave {
  double offset_s;
  double width_s;
  double amplitude_mv;
};

/// Sum-of-Gaussians beat morphology. P and T offsets/widths shrink with the
/// square root of the RR interval (seconds); Q, R, S stay fixed.
struct EcgTemplate {
  Wave p{-0.17, 0.020, 0.12};
  Wave q{-0.030, 0.008, -0.10};
  Wave r{0.0, 0.010, 1.00};
  Wave s{0.030, 0.008, -0.22};
  Wave t{0.25, 0.040, 0.28};
};

struct EcgSignal {
  SampleStream stream;
  std::vector<std::size_t> r_peaks;
};

/// Span of the beat (seconds) at the given RR interval: ±2 widths around the
/// earliest and latest waves.
double template_span(const EcgTemplate& tmpl, double rr_s);

EcgSignal gen_ecg(double hr_bpm, double fs, double duration_s, const EcgTemplate& tmpl = {});

struct BaselineNoise {
  double freq_hz = 0.25;
  double amplitude_mv = 0.0;
};

struct PowerlineNoise {
  double freq_hz = 50.0;
  double amplitude_mv = 0.0;
};

struct EmgNoise {
  double band_lo_hz = 20.0;
  double band_hi_hz = 100.0;
  double rms_mv = 0.0;
  std::uint64_t seed = 1;
};

struct ContactNoise {
  double rate_per_s = 0.0;
  double step_mv = 0.0;
  double decay_s = 0.3;
  std::uint64_t seed = 2;
};

struct NoiseConfig {
  BaselineNoise baseline;
  PowerlineNoise powerline;
  EmgNoise emg;
  ContactNoise contact;

  /// baseline 0.1 mV @ 0.25 Hz, powerline 0.3 mV @ 50 Hz, EMG 0.05 mV RMS.
  static NoiseConfig ambulatory_default();
};

SampleStream add_noise(const SampleStream& stream, const NoiseConfig& cfg);

enum class FilterKind : std::uint8_t { Notch, Lowpass, Highpass, Custom };

const char* to_string(FilterKind kind) noexcept;

inline constexpr double kButterworthQ = 0.70710678118654752;

/// Transfer function b(z)/a(z) with a[0] == 1.
struct FilterSpec {
  std::vector<double> num;
  std::vector<double> den;
  FilterKind kind = FilterKind::Custom;
  double freq_hz = 0.0;
  double fs = 0.0;
  double q = 0.0;
};

FilterSpec design_filter(FilterKind kind, double freq_hz, double fs, double q = kButterworthQ);

/// Schur-Cohn test: every root of the denominator strictly inside |z| = 1.
bool is_stable(const FilterSpec& spec);

/// |H(e^{j 2 pi f / fs})|
double magnitude_response(const FilterSpec& spec, double freq_hz, double fs);

/// Direct-form difference equation, zero initial state. Digital streams are
/// rounded back to saturated 16-bit codes.
SampleStream apply_filter(const FilterSpec& spec, const SampleStream& stream);

struct NotchConfig {
  double f0_hz = 50.0;
  double q = 30.0;
  bool enabled = true;
};

struct AfeConfig {
  double hpf_cutoff_hz = 0.5;
  double lna_gain = 1.0;
  int adc_bits = 16;
  /// Input-referred; the converter's post-gain full scale is this times lna_gain.
  double adc_full_scale_mv = 3.0;
  NotchConfig notch;
  double lpf_cutoff_hz = 40.0;
  bool notch_first = true;
};

struct QuantizeResult {
  SampleStream stream;
  std::size_t saturations = 0;
};

/// code = round(sample / (full_scale * gain) * 32767), saturated.
QuantizeResult adc_quantize(const SampleStream& stream, const AfeConfig& cfg);
double dequantize(double code, const AfeConfig& cfg);

struct AfeDiagnostics {
  std::size_t adc_saturations = 0;
  std::size_t dsp_saturations = 0;
  double hpf_dc_residue_mv = 0.0;
  double output_dc_residue_codes = 0.0;
};

struct AfeResult {
  SampleStream stream;
  AfeDiagnostics diagnostics;
};

/// highpass -> gain -> ADC -> notch -> lowpass (notch and lowpass swap when
/// notch_first is false).
AfeResult afe_pipeline(const SampleStream& stream, const AfeConfig& cfg);

void validate(const AfeConfig& cfg, double fs);

}  // namespace ecgm::signal
