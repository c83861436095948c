// SPDX-License-Identifier: Apache-2.0
//
// Fixed-point formats, quantization, phase wrapping and the SNR/ENOB
// bookkeeping shared by the rest of the simulator.
#pragma once

#include <cstdint>

namespace dpll {

inline constexpr double kPi = 3.141592653589793238462643383279502884;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Description of one fixed-point word: width, signedness and the value of
/// one LSB in engineering units.
struct FixedFormat {
  int total_bits = 16;
  bool is_signed = true;
  double scale = 1.0;

  std::int64_t min_code() const;
  std::int64_t max_code() const;
  bool valid() const;

  /// 14-bit converter code with full scale mapped to [-1, +1).
  static FixedFormat adc14() { return {14, true, 1.0 / 8192.0}; }
  static FixedFormat dac14() { return {14, true, 1.0 / 8192.0}; }
};

/// ADC noise description: time-domain SNR over the full Nyquist band.
struct AdcSpec {
  double snr_t_db = 63.0;
  int bits = 14;
  double fs_hz = 125e6;

  /// snr_t cannot exceed the ideal quantizer bound 6.02*bits + 1.76.
  bool valid() const;
};

/// Round x to the nearest representable code (half-to-even), saturating at
/// the format limits.
std::int64_t quantize(double x, const FixedFormat& fmt);

/// Engineering value of a code.
double dequantize(std::int64_t code, const FixedFormat& fmt);

/// Reduce an angle to [-pi, pi). Throws std::invalid_argument on
/// non-finite input. The reduction stays accurate for |x| up to ~1e7 rad.
double wrap_phase(double x);

/// SNR seen in a bandwidth bw: snr_t + 10*log10(fs / (2*bw)).
/// Throws std::out_of_range unless 0 < bw <= fs/2.
double spectral_snr_db(const AdcSpec& spec, double bw_hz);

/// Effective number of bits for a time-domain SNR: (snr - 1.76) / 6.02.
double enob_bits(double snr_t_db);

}  // namespace dpll
