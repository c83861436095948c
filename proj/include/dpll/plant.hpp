// SPDX-License-Identifier: Apache-2.0
//
// Everything outside the controller: VCO/DAC output mappings, pure delays,
// the double-pass fiber link, and seeded noise sources.
#pragma once

#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace dpll {

/// Internal VCO: a 16-bit word maps linearly onto [0, fs/2], so the
/// full scale is 62.5 MHz at the stock 125 MHz clock (31.25 MHz/V over
/// the +/-1 V DAC span).
struct VcoSpec {
  bool enabled = false;
  double full_scale_hz = 62.5e6;
  int word_bits = 16;
  double gain_hz_per_v = 31.25e6;
  double quiescent_offset_hz = 0.0;
  double amplitude = 1.0;   // DDS output amplitude, DAC units
  double dc_offset_v = 0.0;
};

struct DacSpec {
  int bits = 14;
  double v_min = -1.0;
  double v_max = 1.0;
};

/// word -> Hz, endpoints exact: 0 -> 0 Hz, 2^16-1 -> full scale.
double vco_map(std::uint32_t code, const VcoSpec& spec = VcoSpec{});

/// 14-bit signed code -> volts, [-8192, 8191] onto [-1, +1).
double dac_map(std::int32_t code, const DacSpec& spec = DacSpec{});

/// Integer-sample delay line (zero-initialized).
class DelayLine {
 public:
  explicit DelayLine(std::size_t delay_samples);
  double step(double x);
  std::size_t delay() const { return delay_; }
  void reset();

 private:
  std::size_t delay_;
  std::size_t pos_ = 0;
  std::vector<double> buf_;
};

/// Frequency response of the AOM+VCO combination: either an ideal
/// unity-gain delay or a measured curve loaded from CSV
/// (freq_hz, mag_db, phase_deg with a header row), interpolated linearly.
class AomVcoResponse {
 public:
  static AomVcoResponse pure_delay(double tau_s);
  static AomVcoResponse from_csv(const std::string& path);

  std::complex<double> at(double f_hz) const;

 private:
  AomVcoResponse() = default;
  bool measured_ = false;
  double tau_s_ = 0.0;
  std::vector<double> freqs_, mag_db_, phase_deg_;
};

/// Composable description of the controlled system for the fiber-link
/// experiment. kc is the open-loop DC gain seen by the loop filter and is
/// the single source feeding the Table II formulas.
struct LinkModel {
  double tau_link_s = 2.0e-6;  // one-way differential fiber delay (400 m)
  double tau_aom_s = 1.5e-6;
  double tau_fpga_s = 565e-9;
  double kc_hz_per_v = 1.0;
  bool double_pass = true;

  double total_delay_s() const { return tau_link_s + tau_aom_s + tau_fpga_s; }
};

/// Analytic response of the complete Doppler-cancellation link:
/// H(f) = H_aomvco(f) * exp(-i*2*pi*f*tau_link) * cos(2*pi*f*tau_link)
/// when double_pass. The signed cosine is the amplitude of the double-pass
/// comb; its power shape is the cosine squared, with nulls at
/// f = (2n+1)/(4*tau_link). Single-pass models omit the cosine entirely.
std::complex<double> link_response(double f_hz, const LinkModel& m,
                                   const AomVcoResponse& aom_vco);

struct NoiseSpec {
  enum class Kind { white_phase, white_frequency, adc_snr };
  Kind kind = Kind::white_phase;
  /// one-sided PSD level (rad^2/Hz or Hz^2/Hz) for the white kinds;
  /// time-domain SNR in dB relative to the carrier amplitude for adc_snr.
  double level = 0.0;
  std::uint64_t seed = 0;
};

/// Deterministic Gaussian stream: a counter-based generator hashed from
/// (seed, sample index) feeding a Box-Muller transform, so equal seeds give
/// bit-identical streams and any sample can be regenerated independently.
class NoiseGenerator {
 public:
  NoiseGenerator(const NoiseSpec& spec, double fs_hz,
                 double carrier_amplitude = 1.0);

  /// Next sample; units follow the kind (rad, Hz or carrier units).
  double step();
  /// Unit-variance normal for an explicit sample index.
  double unit_normal(std::uint64_t n) const;
  double sigma() const { return sigma_; }
  void reset() { n_ = 0; }

 private:
  NoiseSpec spec_;
  double sigma_ = 0.0;
  std::uint64_t n_ = 0;
};

/// Sum of the latency contributions along a chain.
double total_latency(std::span<const double> parts_s);

}  // namespace dpll
