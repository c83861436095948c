// SPDX-License-Identifier: Apache-2.0
//
// Demodulation front end: 48-bit NCO, I/Q mixer, selectable low-pass
// filters, arctangent phase extraction and the wrapped phase derivative.
#pragma once

#include <complex>
#include <cstdint>
#include <optional>

#include "dpll/numerics.hpp"

namespace dpll {

inline constexpr std::uint64_t kNcoModulus = std::uint64_t{1} << 48;
inline constexpr std::uint64_t kNcoMask = kNcoModulus - 1;

/// Phase-accumulator DDS state. The accumulator advances by the tuning
/// word each sample; a full circle is 2^48, so the mean output frequency
/// is exactly tuning_word / 2^48 * f_clk.
struct NcoState {
  std::uint64_t accumulator = 0;  // < 2^48
  std::uint64_t tuning_word = 0;  // < 2^48
  double f_clk_hz = 125e6;
};

struct NcoOutput {
  double cos_out = 1.0;
  double sin_out = 0.0;
};

/// Tuning word for a reference frequency: round(f_ref / f_clk * 2^48),
/// evaluated in exact integer arithmetic when both inputs are integral Hz.
/// Throws std::out_of_range unless 0 <= f_ref < f_clk.
std::uint64_t tuning_word(double f_ref_hz, double f_clk_hz);

/// Exact output frequency realized by a tuning word.
double nco_frequency(std::uint64_t tuning_word, double f_clk_hz);

enum class SineEval {
  full_precision,  // cos/sin evaluated from the full 48-bit accumulator
  lut16,           // 16-bit truncated phase into a lookup table
};

/// Emit cos/sin of the current accumulator and advance it by one tuning
/// word (mod 2^48).
NcoOutput nco_step(NcoState& state, SineEval eval = SineEval::full_precision);

struct IqSample {
  double i = 0.0;
  double q = 0.0;
  std::int64_t t_index = 0;
};

/// Mix one real sample against the NCO outputs. The quadrature arm uses
/// the conjugate phasor (q = -x*sin) so that a positive extracted phase
/// means the input leads the NCO.
IqSample iq_demodulate(double x, const NcoOutput& nco, std::int64_t t_index = 0);

/// The three selectable I/Q low-pass bandwidths. Cutoffs are quoted at
/// fs = 125 MHz and scale proportionally with fs.
enum class LpfSelect { mhz3_75, mhz15_5, mhz31 };

double lpf_cutoff_hz(LpfSelect sel, double fs_hz);

/// One second-order IIR section (direct form II transposed).
class Biquad {
 public:
  Biquad() = default;
  Biquad(double b0, double b1, double b2, double a1, double a2)
      : b0_(b0), b1_(b1), b2_(b2), a1_(a1), a2_(a2) {}

  /// RBJ-cookbook low-pass section at f0 with quality factor q.
  static Biquad lowpass(double f0_hz, double fs_hz, double q);

  double step(double x);
  void reset();
  std::complex<double> response(double f_hz, double fs_hz) const;

 private:
  double b0_ = 1, b1_ = 0, b2_ = 0, a1_ = 0, a2_ = 0;
  double z1_ = 0, z2_ = 0;
};

/// 4th-order Butterworth low-pass (two cascaded biquads) applied to both
/// arms of an I/Q stream. Unity DC gain, -3.01 dB at the selected cutoff.
class IqLowpass {
 public:
  IqLowpass(LpfSelect sel, double fs_hz);

  IqSample step(const IqSample& s);
  void reset();
  std::complex<double> response(double f_hz) const;
  /// Low-frequency group delay in seconds (used by the tuning helper).
  double group_delay_s() const;
  double fs_hz() const { return fs_hz_; }

 private:
  double fs_hz_;
  Biquad i1_, i2_, q1_, q2_;
};

/// Four-quadrant phase of an I/Q sample, in [-pi, pi). Returns nullopt on
/// zero-magnitude input (signal loss); the caller decides how to proceed.
std::optional<double> phase_extract(const IqSample& s);

/// Wrapped difference of successive phase measurements, always in
/// [-pi, pi): the loop works on a bounded signal even though the phase
/// ramp itself is unbounded.
double phase_increment(double phase_now_rad, double phase_prev_rad);

/// Complete per-channel demodulation chain: NCO, mixer, I/Q low-pass,
/// arctangent and wrapped derivative. On signal loss the previous phase is
/// held and the sample is flagged.
class DemodChannel {
 public:
  DemodChannel(double fs_hz, double f_ref_hz, LpfSelect sel,
               SineEval eval = SineEval::full_precision);

  struct Output {
    double i = 0;
    double q = 0;
    double phase = 0;
    double increment = 0;
    bool signal_loss = false;
  };

  Output step(double x);
  void reset();

  const NcoState& nco() const { return nco_; }
  const IqLowpass& lowpass() const { return lpf_; }
  double fs_hz() const { return fs_hz_; }

 private:
  double fs_hz_;
  SineEval eval_;
  NcoState nco_;
  IqLowpass lpf_;
  double prev_phase_ = 0.0;
  std::int64_t t_ = 0;
};

}  // namespace dpll
