#include "ecgm/signal.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <numeric>
#include <random>

#include "ecgm/error.hpp"

namespace ecgm::signal {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

[[noreturn]] void param_error(const std::string& what) {
  throw Error(ErrorKind::Parameter, what);
}

double gaussian(double t, const Wave& w) {
  const double z = (t - w.offset_s) / w.width_s;
  return w.amplitude_mv * std::exp(-0.5 * z * z);
}

Wave rate_scaled(const Wave& w, double scale) {
  return {w.offset_s * scale, w.width_s * scale, w.amplitude_mv};
}

double saturate_code(double v, std::size_t& saturations) {
  const double r = std::round(v);
  if (r > kAdcMaxCode) {
    ++saturations;
    return kAdcMaxCode;
  }
  if (r < kAdcMinCode) {
    ++saturations;
    return kAdcMinCode;
  }
  return r;
}

// Direct form I over doubles; the caller decides what to do with the domain.
std::vector<double> run_filter(const FilterSpec& spec, std::span<const double> x) {
  if (spec.num.empty() || spec.den.empty() || spec.den[0] == 0.0) {
    param_error("filter needs a numerator and a denominator with a[0] != 0");
  }
  if (!is_stable(spec)) param_error("filter denominator has roots on or outside |z| = 1");

  const double a0 = spec.den[0];
  std::vector<double> b(spec.num), a(spec.den);
  for (auto& c : b) c /= a0;
  for (auto& c : a) c /= a0;

  std::vector<double> y(x.size(), 0.0);
  for (std::size_t n = 0; n < x.size(); ++n) {
    double acc = 0.0;
    for (std::size_t k = 0; k < b.size() && k <= n; ++k) acc += b[k] * x[n - k];
    for (std::size_t k = 1; k < a.size() && k <= n; ++k) acc -= a[k] * y[n - k];
    y[n] = acc;
  }
  return y;
}

double mean(std::span<const double> v) {
  if (v.empty()) return 0.0;
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

SampleStream filter_digital(const FilterSpec& spec, const SampleStream& in,
                            std::size_t& saturations) {
  SampleStream out{in.fs, Domain::Digital, run_filter(spec, in.samples)};
  for (auto& v : out.samples) v = saturate_code(v, saturations);
  return out;
}

}  // namespace

double template_span(const EcgTemplate& tmpl, double rr_s) {
  const double scale = std::sqrt(rr_s);
  const Wave waves[] = {rate_scaled(tmpl.p, scale), tmpl.q, tmpl.r, tmpl.s,
                        rate_scaled(tmpl.t, scale)};
  double lo = 0.0, hi = 0.0;
  for (const auto& w : waves) {
    lo = std::min(lo, w.offset_s - 2.0 * w.width_s);
    hi = std::max(hi, w.offset_s + 2.0 * w.width_s);
  }
  return hi - lo;
}

EcgSignal gen_ecg(double hr_bpm, double fs, double duration_s, const EcgTemplate& tmpl) {
  if (!(hr_bpm > 0.0)) param_error("heart rate must be positive");
  if (!(fs > 0.0)) param_error("sampling rate must be positive");
  if (!(duration_s >= 0.0)) param_error("duration must be non-negative");
  for (const Wave* w : {&tmpl.p, &tmpl.q, &tmpl.r, &tmpl.s, &tmpl.t}) {
    if (!(w->width_s > 0.0)) param_error("template wave widths must be positive");
  }

  const double rr = 60.0 / hr_bpm;
  const double span = template_span(tmpl, rr);
  if (rr < span) {
    param_error("beat period " + std::to_string(rr) + " s is shorter than the template span " +
                std::to_string(span) + " s");
  }
  const double scale = std::sqrt(rr);
  const Wave waves[] = {rate_scaled(tmpl.p, scale), tmpl.q, tmpl.r, tmpl.s,
                        rate_scaled(tmpl.t, scale)};

  EcgSignal out;
  out.stream.fs = fs;
  out.stream.domain = Domain::Analog;
  const auto n = static_cast<std::size_t>(std::floor(duration_s * fs + 1e-9));
  out.stream.samples.assign(n, 0.0);

  // R peaks sit at (k + 1/2) RR so the first P wave is not clipped.
  std::vector<double> beat_times;
  for (std::size_t k = 0;; ++k) {
    const double t = (static_cast<double>(k) + 0.5) * rr;
    if (t >= duration_s) break;
    const auto idx = static_cast<std::size_t>(std::llround(t * fs));
    if (idx >= n) break;
    beat_times.push_back(t);
    out.r_peaks.push_back(idx);
  }

  const double reach = span + 6.0 * tmpl.t.width_s;
  for (double t_beat : beat_times) {
    const auto first = static_cast<std::ptrdiff_t>(std::ceil((t_beat - reach) * fs));
    const auto last = static_cast<std::ptrdiff_t>(std::floor((t_beat + reach) * fs));
    for (auto i = std::max<std::ptrdiff_t>(first, 0);
         i <= last && i < static_cast<std::ptrdiff_t>(n); ++i) {
      const double t = static_cast<double>(i) / fs - t_beat;
      double v = 0.0;
      for (const auto& w : waves) v += gaussian(t, w);
      out.stream.samples[static_cast<std::size_t>(i)] += v;
    }
  }
  return out;
}

NoiseConfig NoiseConfig::ambulatory_default() {
  NoiseConfig cfg;
  cfg.baseline = {0.25, 0.1};
  cfg.powerline = {50.0, 0.3};
  cfg.emg.rms_mv = 0.05;
  return cfg;
}

SampleStream add_noise(const SampleStream& stream, const NoiseConfig& cfg) {
  if (stream.domain != Domain::Analog) param_error("noise is added to analog streams only");
  if (!(stream.fs > 0.0)) param_error("sampling rate must be positive");
  const auto amps = {cfg.baseline.amplitude_mv, cfg.powerline.amplitude_mv, cfg.emg.rms_mv,
                     cfg.contact.step_mv, cfg.contact.rate_per_s};
  for (double a : amps) {
    if (!(a >= 0.0)) param_error("noise amplitudes and rates must be non-negative");
  }

  const double fs = stream.fs;
  SampleStream out = stream;
  auto& y = out.samples;
  const std::size_t n = y.size();

  if (cfg.baseline.amplitude_mv > 0.0) {
    for (std::size_t i = 0; i < n; ++i) {
      y[i] += cfg.baseline.amplitude_mv *
              std::sin(kTwoPi * cfg.baseline.freq_hz * static_cast<double>(i) / fs);
    }
  }

  if (cfg.powerline.amplitude_mv > 0.0) {
    if (!(cfg.powerline.freq_hz > 0.0 && cfg.powerline.freq_hz < fs / 2.0)) {
      param_error("powerline frequency must lie in (0, fs/2)");
    }
    for (std::size_t i = 0; i < n; ++i) {
      y[i] += cfg.powerline.amplitude_mv *
              std::sin(kTwoPi * cfg.powerline.freq_hz * static_cast<double>(i) / fs);
    }
  }

  if (cfg.emg.rms_mv > 0.0) {
    const auto& emg = cfg.emg;
    if (!(emg.band_lo_hz > 0.0 && emg.band_lo_hz < emg.band_hi_hz)) {
      param_error("EMG band must satisfy 0 < lo < hi");
    }
    if (emg.band_hi_hz >= fs / 2.0) param_error("EMG band upper edge must be below fs/2");
    if (n > 0) {
      std::mt19937_64 rng(emg.seed);
      std::normal_distribution<double> normal(0.0, 1.0);
      std::vector<double> white(n);
      for (auto& w : white) w = normal(rng);
      auto band = run_filter(design_filter(FilterKind::Highpass, emg.band_lo_hz, fs), white);
      band = run_filter(design_filter(FilterKind::Lowpass, emg.band_hi_hz, fs), band);
      double ss = 0.0;
      for (double v : band) ss += v * v;
      const double rms = std::sqrt(ss / static_cast<double>(n));
      if (rms > 0.0) {
        for (std::size_t i = 0; i < n; ++i) y[i] += band[i] * (emg.rms_mv / rms);
      }
    }
  }

  if (cfg.contact.step_mv > 0.0 && cfg.contact.rate_per_s > 0.0) {
    if (!(cfg.contact.decay_s > 0.0)) param_error("contact decay time must be positive");
    std::mt19937_64 rng(cfg.contact.seed);
    std::exponential_distribution<double> gap(cfg.contact.rate_per_s);
    std::bernoulli_distribution positive(0.5);
    const double duration = static_cast<double>(n) / fs;
    for (double onset = gap(rng); onset < duration; onset += gap(rng)) {
      const double step = positive(rng) ? cfg.contact.step_mv : -cfg.contact.step_mv;
      for (auto i = static_cast<std::size_t>(std::ceil(onset * fs)); i < n; ++i) {
        const double decay = std::exp(-(static_cast<double>(i) / fs - onset) / cfg.contact.decay_s);
        if (decay < 1e-9) break;
        y[i] += step * decay;
      }
    }
  }
  return out;
}

const char* to_string(FilterKind kind) noexcept {
  switch (kind) {
    case FilterKind::Notch: return "notch";
    case FilterKind::Lowpass: return "lowpass";
    case FilterKind::Highpass: return "highpass";
    case FilterKind::Custom: return "custom";
  }
  return "?";
}

FilterSpec design_filter(FilterKind kind, double freq_hz, double fs, double q) {
  if (!(fs > 0.0)) param_error("sampling rate must be positive");
  if (!(freq_hz > 0.0 && freq_hz < fs / 2.0)) {
    param_error(std::string(to_string(kind)) + " frequency " + std::to_string(freq_hz) +
                " Hz outside (0, fs/2 = " + std::to_string(fs / 2.0) + ")");
  }
  if (!(q > 0.0)) param_error("filter Q must be positive");

  // Bilinear-transform biquads (audio EQ cookbook).
  const double w0 = kTwoPi * freq_hz / fs;
  const double c = std::cos(w0);
  const double alpha = std::sin(w0) / (2.0 * q);
  const double a0 = 1.0 + alpha;

  FilterSpec spec;
  spec.kind = kind;
  spec.freq_hz = freq_hz;
  spec.fs = fs;
  spec.q = q;
  switch (kind) {
    case FilterKind::Notch:
      spec.num = {1.0, -2.0 * c, 1.0};
      break;
    case FilterKind::Lowpass:
      spec.num = {(1.0 - c) / 2.0, 1.0 - c, (1.0 - c) / 2.0};
      break;
    case FilterKind::Highpass:
      spec.num = {(1.0 + c) / 2.0, -(1.0 + c), (1.0 + c) / 2.0};
      break;
    case FilterKind::Custom:
      param_error("custom filters are built directly, not designed");
  }
  spec.den = {1.0, -2.0 * c / a0, (1.0 - alpha) / a0};
  for (auto& b : spec.num) b /= a0;
  return spec;
}

bool is_stable(const FilterSpec& spec) {
  if (spec.den.empty() || spec.den[0] == 0.0) return false;
  std::vector<double> a(spec.den);
  while (a.size() > 1 && a.back() == 0.0) a.pop_back();
  for (auto& c : a) c /= spec.den[0];
  // Step-down recursion: stable iff every reflection coefficient |k| < 1.
  for (std::size_t n = a.size() - 1; n > 0; --n) {
    const double k = a[n];
    if (!(std::abs(k) < 1.0)) return false;
    std::vector<double> next(n);
    for (std::size_t i = 0; i < n; ++i) next[i] = (a[i] - k * a[n - i]) / (1.0 - k * k);
    a = std::move(next);
  }
  return true;
}

double magnitude_response(const FilterSpec& spec, double freq_hz, double fs) {
  const std::complex<double> z_inv = std::polar(1.0, -kTwoPi * freq_hz / fs);
  auto poly = [&](const std::vector<double>& c) {
    std::complex<double> acc = 0.0, zk = 1.0;
    for (double v : c) {
      acc += v * zk;
      zk *= z_inv;
    }
    return acc;
  };
  return std::abs(poly(spec.num) / poly(spec.den));
}

SampleStream apply_filter(const FilterSpec& spec, const SampleStream& stream) {
  if (stream.domain == Domain::Digital) {
    std::size_t ignored = 0;
    return filter_digital(spec, stream, ignored);
  }
  return {stream.fs, Domain::Analog, run_filter(spec, stream.samples)};
}

QuantizeResult adc_quantize(const SampleStream& stream, const AfeConfig& cfg) {
  if (cfg.adc_bits != 16) param_error("only a 16-bit converter is modelled");
  if (!(cfg.adc_full_scale_mv > 0.0)) param_error("ADC full scale must be positive");
  if (!(cfg.lna_gain > 0.0)) param_error("LNA gain must be positive");
  if (stream.domain != Domain::Analog) param_error("ADC input must be an analog stream");

  const double full_scale = cfg.adc_full_scale_mv * cfg.lna_gain;
  QuantizeResult out{{stream.fs, Domain::Digital, {}}, 0};
  out.stream.samples.reserve(stream.size());
  for (double v : stream.samples) {
    out.stream.samples.push_back(saturate_code(v / full_scale * kAdcMaxCode, out.saturations));
  }
  return out;
}

double dequantize(double code, const AfeConfig& cfg) {
  return code / kAdcMaxCode * cfg.adc_full_scale_mv * cfg.lna_gain;
}

void validate(const AfeConfig& cfg, double fs) {
  if (!(fs > 0.0)) param_error("sampling rate must be positive");
  if (cfg.adc_bits != 16) param_error("only a 16-bit converter is modelled");
  const double nyquist = fs / 2.0;
  if (!(cfg.hpf_cutoff_hz > 0.0 && cfg.hpf_cutoff_hz < cfg.lpf_cutoff_hz &&
        cfg.lpf_cutoff_hz < nyquist)) {
    param_error("AFE needs 0 < hpf_cutoff < lpf_cutoff < fs/2");
  }
  if (cfg.notch.enabled &&
      !(cfg.hpf_cutoff_hz < cfg.notch.f0_hz && cfg.notch.f0_hz < nyquist)) {
    param_error("AFE needs hpf_cutoff < notch f0 < fs/2");
  }
}

AfeResult afe_pipeline(const SampleStream& stream, const AfeConfig& cfg) {
  if (stream.domain != Domain::Analog) param_error("AFE input must be an analog stream");
  validate(cfg, stream.fs);
  const double fs = stream.fs;

  AfeResult result;
  SampleStream hp = apply_filter(design_filter(FilterKind::Highpass, cfg.hpf_cutoff_hz, fs), stream);
  result.diagnostics.hpf_dc_residue_mv = mean(hp.samples);
  for (auto& v : hp.samples) v *= cfg.lna_gain;

  auto quantized = adc_quantize(hp, cfg);
  result.diagnostics.adc_saturations = quantized.saturations;

  const FilterSpec lowpass = design_filter(FilterKind::Lowpass, cfg.lpf_cutoff_hz, fs);
  SampleStream digital = std::move(quantized.stream);
  std::size_t& dsp_sat = result.diagnostics.dsp_saturations;
  if (cfg.notch.enabled) {
    const FilterSpec notch = design_filter(FilterKind::Notch, cfg.notch.f0_hz, fs, cfg.notch.q);
    if (cfg.notch_first) {
      digital = filter_digital(lowpass, filter_digital(notch, digital, dsp_sat), dsp_sat);
    } else {
      digital = filter_digital(notch, filter_digital(lowpass, digital, dsp_sat), dsp_sat);
    }
  } else {
    digital = filter_digital(lowpass, digital, dsp_sat);
  }
  result.diagnostics.output_dc_residue_codes = mean(digital.samples);
  result.stream = std::move(digital);
  return result;
}

}  // namespace ecgm::signal
