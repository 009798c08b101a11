#pragma once

// Independent oracles and generators shared by the test binaries. Nothing
// here calls into the library code it is used to check.

#include <cmath>
#include <complex>
#include <cstdint>
#include <numbers>
#include <random>
#include <span>
#include <vector>

#include "ecgm/codec.hpp"

namespace testing {

/// Single-bin DFT amplitude of `x` at `freq_hz`, scaled so a unit sine reads 1.
/// Windows with an integer number of cycles give the exact tone amplitude.
inline double tone_amplitude(std::span<const double> x, double freq_hz, double fs) {
  std::complex<double> acc{0.0, 0.0};
  const double w = 2.0 * std::numbers::pi * freq_hz / fs;
  for (std::size_t n = 0; n < x.size(); ++n) {
    acc += x[n] * std::polar(1.0, -w * static_cast<double>(n));
  }
  return 2.0 * std::abs(acc) / static_cast<double>(x.size());
}

/// Full DFT magnitude spectrum (first half), brute force O(N^2).
inline std::vector<double> dft_magnitudes(std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<double> mags(n / 2 + 1);
  for (std::size_t k = 0; k < mags.size(); ++k) {
    std::complex<double> acc{0.0, 0.0};
    for (std::size_t i = 0; i < n; ++i) {
      acc += x[i] * std::polar(1.0, -2.0 * std::numbers::pi * static_cast<double>(k * i % n) /
                                        static_cast<double>(n));
    }
    mags[k] = 2.0 * std::abs(acc) / static_cast<double>(n);
  }
  return mags;
}

/// |H(e^{jw})| straight from the coefficient polynomials.
inline double eval_response(std::span<const double> num, std::span<const double> den, double freq_hz,
                            double fs) {
  const auto z1 = std::polar(1.0, -2.0 * std::numbers::pi * freq_hz / fs);
  std::complex<double> b{0.0, 0.0}, a{0.0, 0.0}, p{1.0, 0.0};
  for (std::size_t k = 0; k < std::max(num.size(), den.size()); ++k) {
    if (k < num.size()) b += num[k] * p;
    if (k < den.size()) a += den[k] * p;
    p *= z1;
  }
  return std::abs(b / a);
}

inline double rms(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return x.empty() ? 0.0 : std::sqrt(s / static_cast<double>(x.size()));
}

struct Alignment {
  double ncc = -2.0;
  std::ptrdiff_t lag = 0;
};

/// Best normalized cross-correlation of y[n + lag] against x[n] over
/// lag in [0, max_lag], computed on the overlap with means removed.
inline Alignment best_alignment(std::span<const double> x, std::span<const double> y, std::size_t skip,
                                std::ptrdiff_t max_lag) {
  Alignment best;
  for (std::ptrdiff_t lag = 0; lag <= max_lag; ++lag) {
    const std::size_t n = std::min(x.size(), y.size() - static_cast<std::size_t>(lag));
    if (n <= skip + 2) break;
    double mx = 0.0, my = 0.0;
    for (std::size_t i = skip; i < n; ++i) {
      mx += x[i];
      my += y[i + static_cast<std::size_t>(lag)];
    }
    const double cnt = static_cast<double>(n - skip);
    mx /= cnt;
    my /= cnt;
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = skip; i < n; ++i) {
      const double a = x[i] - mx, b = y[i + static_cast<std::size_t>(lag)] - my;
      sxy += a * b;
      sxx += a * a;
      syy += b * b;
    }
    const double c = sxy / std::sqrt(sxx * syy);
    if (c > best.ncc) best = {c, lag};
  }
  return best;
}

/// Hand-rolled reference checksum: NOT of the byte sum.
inline std::uint8_t ref_checksum(std::span<const std::uint8_t> payload) {
  unsigned sum = 0;
  for (auto b : payload) sum += b;
  return static_cast<std::uint8_t>(~sum & 0xFF);
}

/// Random valid packet whose serialized payload fits in [1, 169] bytes.
/// Covers every known code, opaque codes >= 0x80 and EXCODE prefixes.
inline ecgm::codec::Packet random_packet(std::mt19937_64& rng) {
  using ecgm::codec::DataRow;
  std::uniform_int_distribution<int> pick(0, 7);
  std::uniform_int_distribution<int> byte(0, 255);
  std::uniform_int_distribution<int> rows_n(1, 40);
  std::uniform_int_distribution<int> excode(0, 3);
  ecgm::codec::Packet p;
  std::size_t used = 0;
  const int want = rows_n(rng);
  for (int i = 0; i < want; ++i) {
    DataRow r;
    switch (pick(rng)) {
      case 0: r = DataRow::poor_signal(static_cast<std::uint8_t>(byte(rng))); break;
      case 1: r = DataRow::heart_rate(static_cast<std::uint8_t>(byte(rng))); break;
      case 2: r = DataRow::temperature_centi(static_cast<std::int16_t>(byte(rng) << 8 | byte(rng))); break;
      case 3: r = DataRow::spo2(static_cast<std::uint8_t>(byte(rng))); break;
      case 4: r = DataRow::motion(byte(rng) & 1); break;
      case 5:
      case 6: r = DataRow::raw_ecg(static_cast<std::int16_t>(byte(rng) << 8 | byte(rng))); break;
      default: {
        r.code = static_cast<std::uint8_t>(0x81 + byte(rng) % 0x7F);
        r.value.resize(static_cast<std::size_t>(byte(rng) % 6));
        for (auto& b : r.value) b = static_cast<std::uint8_t>(byte(rng));
      }
    }
    if (excode(rng) == 0) r.excode_level = static_cast<unsigned>(1 + byte(rng) % 2);
    // Wire size by hand: EXCODEs, CODE, LENGTH for codes >= 0x80, VALUE.
    const std::size_t size = r.excode_level + 1 + (r.code >= 0x80 ? 1 : 0) + r.value.size();
    if (used + size > ecgm::codec::kMaxPayload) break;
    used += size;
    p.rows.push_back(std::move(r));
  }
  return p;
}

inline std::vector<std::uint8_t> random_bytes(std::mt19937_64& rng, std::size_t n) {
  std::uniform_int_distribution<int> byte(0, 255);
  std::vector<std::uint8_t> out(n);
  for (auto& b : out) b = static_cast<std::uint8_t>(byte(rng));
  return out;
}

}  // namespace testing
