// SPDX-License-Identifier: Apache-2.0
//
// The diagnostic toolkit: swept-sine vector network analyzer, dither
// lock-in gain estimator, zero dead-time frequency counter and Welch
// PSD / integrated phase noise analyzer.
//
// The VNA sweep and the PSD segment loop are the data-parallel kernels of
// this project: both ship an OpenMP variant and a serial reference that
// produce bit-identical results (points and segments are independent and
// the final reductions run in a fixed order).
#pragma once

#include <complex>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

namespace dpll {

/// System under test for stimulus/response instruments. One step consumes
/// one stimulus sample and produces one response sample; clone() yields an
/// independent copy so sweep points can run in parallel.
class VnaSystem {
 public:
  virtual ~VnaSystem() = default;
  virtual double fs() const = 0;
  virtual void reset() = 0;
  virtual double step(double stimulus) = 0;
  /// True if any internal stage clipped since the last reset.
  virtual bool saturated() const { return false; }
  virtual std::unique_ptr<VnaSystem> clone() const = 0;
};

struct VnaSettings {
  double amplitude = 1e-3;
  int settle_cycles = 20;
  int cycles_per_point = 100;
  /// Extra settling applied before every point regardless of frequency
  /// (lets delay lines fill and loops converge).
  std::size_t min_settle_samples = 4096;
};

struct VnaResult {
  std::vector<double> freqs_hz;          // strictly increasing
  std::vector<std::complex<double>> response;
  std::vector<bool> saturated;           // per point
  double excitation_amplitude = 0.0;
  int cycles_per_point = 0;

  bool any_saturated() const;
};

/// 50 log-spaced frequencies, the stock sweep grid.
std::vector<double> log_grid(double f_start_hz, double f_stop_hz,
                             std::size_t points = 50);

/// Swept-sine transfer function measurement. Each point runs a fresh clone
/// of the system: inject amplitude*sin(2*pi*f*n/fs), discard the settle
/// interval, then correlate response and stimulus over an integer number
/// of cycles and return their complex ratio. Frequencies are snapped to
/// the nearest value giving an integer cycle count so the correlation is
/// leakage-free.
VnaResult vna_sweep(const VnaSystem& system, std::span<const double> freqs_hz,
                    const VnaSettings& settings = {});

/// Serial reference for vna_sweep; bit-identical results.
VnaResult vna_sweep_serial(const VnaSystem& system,
                           std::span<const double> freqs_hz,
                           const VnaSettings& settings = {});

struct DitherEstimate {
  double gain_hz_per_v = 0.0;  // signed
  double confidence = 0.0;     // relative standard error; > 1 means unusable
  double dither_freq_hz = 0.0;
  double dither_amplitude_v = 0.0;

  bool reliable() const { return confidence <= 1.0; }
};

/// Square-wave dither lock-in. Drives the system with a square wave of the
/// given amplitude, synchronously demodulates the response at the dither
/// fundamental and scales by the square-wave Fourier coefficient 4/pi to
/// recover the plant gain in response-units per volt, sign included.
/// The estimate is averaged over `blocks` sub-intervals whose scatter
/// yields the confidence figure.
DitherEstimate dither_estimate(VnaSystem& system, double dither_freq_hz,
                               double dither_amplitude_v, double duration_s,
                               int blocks = 8);

struct CounterRecord {
  std::int64_t gate_index = 0;
  double mean_freq_hz = 0.0;
  double gate_time_s = 1.0;
};

/// Zero dead-time frequency counter fed by phase increments. Consecutive
/// gates share boundaries exactly: every sample lands in exactly one gate,
/// so the telescoping sum over gates reconstructs the total phase.
class ZeroDeadTimeCounter {
 public:
  ZeroDeadTimeCounter(double fs_hz, double gate_time_s);

  /// Feed one phase increment (rad); returns a record when a gate closes.
  std::optional<CounterRecord> push(double phase_increment_rad);

  double gate_time_s() const { return gate_time_s_; }
  std::size_t samples_per_gate() const { return samples_per_gate_; }
  /// Exact running sum of everything pushed so far (for conservation checks).
  double total_phase_rad() const { return total_phase_; }
  void reset();

 private:
  double fs_hz_;
  double gate_time_s_;
  std::size_t samples_per_gate_;
  std::size_t in_gate_ = 0;
  double gate_sum_ = 0.0;
  double total_phase_ = 0.0;
  std::int64_t gate_index_ = 0;
};

enum class PsdKind { phase, frequency };

struct PsdResult {
  std::vector<double> freqs_hz;
  std::vector<double> phase_psd;        // rad^2/Hz
  std::vector<double> freq_psd;         // Hz^2/Hz
  std::vector<double> integrated_phase; // rad, integrated from f down to f_max
  std::size_t segment_count = 0;
  double fs_hz = 0.0;

  /// Total power recovered from the one-sided PSD (Parseval check).
  double integral() const;
};

/// Welch estimate: Hann window, 50% overlap, per-segment mean removal,
/// one-sided scaling. `kind` states what the stream is; the other PSD is
/// derived through S_freq(f) = f^2 * S_phase(f). Requires a power-of-two
/// segment length and at least two segments of data.
PsdResult psd_estimate(std::span<const double> stream, double fs_hz,
                       std::size_t segment_length, PsdKind kind);

/// Serial reference for psd_estimate; bit-identical results.
PsdResult psd_estimate_serial(std::span<const double> stream, double fs_hz,
                              std::size_t segment_length, PsdKind kind);

// --- simple LTI adapters, handy for instrument tests -----------------------

/// response == stimulus.
class UnitySystem final : public VnaSystem {
 public:
  explicit UnitySystem(double fs_hz) : fs_(fs_hz) {}
  double fs() const override { return fs_; }
  void reset() override {}
  double step(double stimulus) override { return stimulus; }
  std::unique_ptr<VnaSystem> clone() const override {
    return std::make_unique<UnitySystem>(*this);
  }

 private:
  double fs_;
};

/// Pure integer-sample delay.
class DelaySystem final : public VnaSystem {
 public:
  DelaySystem(double fs_hz, std::size_t delay_samples);
  double fs() const override { return fs_; }
  void reset() override;
  double step(double stimulus) override;
  std::unique_ptr<VnaSystem> clone() const override;

 private:
  double fs_;
  std::size_t delay_;
  std::size_t pos_ = 0;
  std::vector<double> buf_;
};

}  // namespace dpll
