// SPDX-License-Identifier: Apache-2.0
//
// PII^2D loop filter: gain derivation from user-facing crossover
// frequencies, per-sample recurrence and the analytic controller response.
#pragma once

#include <complex>

namespace dpll {

/// Which reference the integrator/differentiator crossover frequencies are
/// quoted against: the 0 dB line or the proportional gain.
enum class CrossoverMode { relative_to_0db, relative_to_kp };

struct LoopFilterConfig {
  double kp_db = 0.0;     // proportional gain in dB relative to 1/kc
  double kc = 1.0;        // system open-loop DC gain (output per input unit)
  double fs_hz = 125e6;
  double f_i_hz = 0.0;    // integrator crossover
  double f_ii_hz = 0.0;   // double-integrator crossover (meets the I branch)
  double f_d_hz = 0.0;    // differentiator crossover
  double f_df_hz = 0.0;   // differentiator roll-off
  CrossoverMode crossover_mode = CrossoverMode::relative_to_0db;
  bool enable_p = true;
  bool enable_i = false;
  bool enable_ii = false;
  bool enable_d = false;

  void validate() const;  // throws std::invalid_argument
};

/// The four runtime gains plus the differentiator roll-off coefficient.
struct GainSet {
  double kp = 0.0;
  double ki = 0.0;
  double kii = 0.0;
  double kd = 0.0;
  double d_filter_coeff = 0.0;
};

/// Gain derivation:
///   Kp  = 10^(kp_db/20) / kc
///   Ki  = (1/kc) * f_i * 2pi/fs      (0 dB mode)   or  Kp * f_i * 2pi/fs
///   Kii = Ki * f_ii * 2pi/fs
///   Kd  = (1/kc) * (1/f_d) * fs/2pi  (0 dB mode)   or  Kp / f_d * fs/2pi
///   d_filter_coeff = f_df * 2pi/fs
/// Disabled branches yield zero gains.
GainSet design_gains(const LoopFilterConfig& cfg);

struct LoopFilterState {
  double integrator_acc = 0.0;
  double double_integrator_acc = 0.0;
  double previous_input = 0.0;
  double d_filter_state = 0.0;
  /// Accumulator and output clamp; defaults to the full DAC range so the
  /// integrators cannot wind up beyond the actuator.
  double saturation_limit = 1.0;
  bool saturated = false;  // latched until reset() or clear_saturation()

  void reset();
  void clear_saturation() { saturated = false; }
};

/// One sample of the PII^2D recurrence:
///   i_acc  += Ki * e                 (read after update)
///   ii_acc += (Kii/Ki) * i_acc       (the II branch integrates the I branch)
///   d      = one-pole roll-off of Kd * (e - e_prev)
///   u      = Kp*e + i_acc + ii_acc + d, everything saturating.
double filter_step(LoopFilterState& state, const GainSet& gains, double e);

/// Exact discrete-time frequency response of the filter_step recurrence at
/// z = exp(i*2*pi*f/fs). Throws std::out_of_range unless 0 < f < fs/2.
std::complex<double> controller_response(const GainSet& gains, double f_hz,
                                         double fs_hz);

}  // namespace dpll
