// SPDX-License-Identifier: Apache-2.0
//
// Sample-synchronous closed-loop simulation: wires the demodulation chain,
// loop filter and plant into the three routing scenarios, and provides the
// analytic closed-loop predictions and the delay-bandwidth rule.
#pragma once

#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dpll/dsp_core.hpp"
#include "dpll/instruments.hpp"
#include "dpll/loop_filter.hpp"
#include "dpll/numerics.hpp"
#include "dpll/plant.hpp"

namespace dpll {

/// Maximum useful noise-rejection bandwidth for a loop limited by a pure
/// latency tau: 1/(8*tau), assuming a first-order loop shape with pi/4 of
/// phase margin.
double max_bandwidth_hz(double tau_s);

enum class Scenario { independent, shared_input, cascaded };

struct RoutingConfig {
  Scenario scenario = Scenario::independent;
  int vco_owner = -1;  // channel index, or -1 when no channel uses the VCO
};

struct DitherConfig {
  bool enabled = false;
  double freq_hz = 1e3;
  double amplitude_v = 0.0;
};

struct ChannelConfig {
  double f_ref_hz = 31.25e6;
  LpfSelect lpf = LpfSelect::mhz31;
  SineEval sine_eval = SineEval::full_precision;
  LoopFilterConfig filter;
  double setpoint = 0.0;      // Hz for phase loops; volts for a cascaded slave
  bool loop_closed = true;
  DitherConfig dither;
  /// Per-pass actuator gain in Hz/V. NaN (the default) derives it from the
  /// plant on channel 0 (kc/2 on a double-pass link, kc otherwise) and
  /// leaves other channels detached.
  double actuator_gain_hz_per_v = std::numeric_limits<double>::quiet_NaN();
};

struct AdcModel {
  bool quantize = false;
  FixedFormat format = FixedFormat::adc14();
  double snr_t_db = 0.0;  // 0 disables the noise source
  std::uint64_t noise_seed = 1;
};

struct EngineConfig {
  double fs_hz = 125e6;
  RoutingConfig routing;
  std::vector<ChannelConfig> channels;
  LinkModel plant;
  std::vector<NoiseSpec> noise;  // link phase/frequency noise sources
  double beat_offset_hz = 0.0;   // beat arrives at f_ref + offset
  double beat_amplitude = 0.9;   // fraction of ADC full scale
  AdcModel adc;
  bool quantize_dac = false;
  VcoSpec vco;

  void validate() const;  // throws std::invalid_argument on conflicts
};

/// Fig. 1 test points recordable from a simulation.
enum class Testpoint { adc_in, i, q, phase, phase_increment, filter_out, dac_out };

const char* testpoint_name(Testpoint tp);
std::optional<Testpoint> testpoint_from_name(const std::string& name);

class DpllEngine {
 public:
  explicit DpllEngine(EngineConfig cfg);
  ~DpllEngine();
  DpllEngine(DpllEngine&&) noexcept;
  DpllEngine& operator=(DpllEngine&&) noexcept;

  struct ChannelSample {
    double adc_in = 0;
    double i = 0;
    double q = 0;
    double phase = 0;
    double phase_increment = 0;
    double filter_out = 0;
    double dac_out = 0;  // actuator command after dither and injection
    bool signal_loss = false;
  };

  /// Advance one sample; inject_u adds a per-channel stimulus at the
  /// actuator summing node (the VNA's injection point).
  void step(std::span<const double> inject_u = {});

  const ChannelSample& channel(std::size_t idx) const { return samples_[idx]; }
  std::size_t num_channels() const { return samples_.size(); }
  /// Out-of-loop observable of the link experiment: the phase actually
  /// delivered at the remote end (noise plus one-way-delayed correction).
  double remote_phase() const { return remote_phase_; }
  double fs() const { return cfg_.fs_hz; }
  const EngineConfig& config() const { return cfg_; }

  bool any_saturated() const;
  void clear_saturation();
  void reset();

  /// Exact discrete-time open-loop response of a channel's loop, matching
  /// the simulated pipeline sample for sample:
  /// L(f) = C(f) * g_pass * H_lpf(f) * z^-D_act * (1 + z^-2*D_link).
  std::complex<double> open_loop_response(double f_hz, std::size_t ch = 0) const;

  // live mutation (applied between samples)
  void set_gains(std::size_t ch, const GainSet& g) { gains_[ch] = g; }
  const GainSet& gains(std::size_t ch) const { return gains_[ch]; }
  void set_dither(std::size_t ch, const DitherConfig& d);
  void set_setpoint(std::size_t ch, double setpoint) {
    cfg_.channels[ch].setpoint = setpoint;
  }
  void set_loop_closed(std::size_t ch, bool closed) {
    cfg_.channels[ch].loop_closed = closed;
  }

  std::size_t actuator_delay_samples() const { return act_delay_samples_; }
  std::size_t link_delay_samples() const { return link_delay_samples_; }

 private:
  struct PlantState;
  struct ChannelState;

  double actuator_output_hz(std::size_t ch, double command_v);
  void set_dither_state(ChannelState& st, const DitherConfig& d);

  EngineConfig cfg_;
  std::size_t act_delay_samples_ = 1;
  std::size_t link_delay_samples_ = 0;
  std::vector<std::unique_ptr<PlantState>> plants_;   // one, or one per channel
  std::vector<std::unique_ptr<ChannelState>> chans_;
  std::vector<GainSet> gains_;
  std::vector<ChannelSample> samples_;
  double remote_phase_ = 0.0;
  bool adc_clipped_ = false;
};

struct SimConfig {
  EngineConfig engine;
  std::size_t duration_samples = 0;
  std::vector<Testpoint> record;
  bool record_remote_phase = false;

  void validate() const;
};

struct SimTrace {
  double fs_hz = 0.0;
  std::vector<std::string> column_names;            // "ch0.phase", ...
  std::vector<std::vector<double>> columns;
  std::string version;

  const std::vector<double>& column(const std::string& name) const;
};

/// Run a configured simulation, recording the requested test points.
SimTrace run_simulation(const SimConfig& cfg);

// --- analytic closed-loop predictions --------------------------------------

struct ClosedLoopPrediction {
  std::vector<double> freqs_hz;
  std::vector<std::complex<double>> sensitivity;    // S = 1/(1+L)
  std::vector<std::complex<double>> complementary;  // T = L/(1+L)
};

/// S and T for an arbitrary open-loop response; S + T = 1 pointwise.
/// S is the rejection for disturbances injected at the actuator (the
/// local-end VCO noise point); T is the transfer of detection noise.
ClosedLoopPrediction closed_loop_prediction(
    const std::function<std::complex<double>(double)>& open_loop,
    std::span<const double> freqs_hz);

/// Rejection of lumped link noise at the remote output, the third
/// injection point: R = S * (1 + G*(1 - z^-2*D_link)) with G the forward
/// path up to a single pass.
std::vector<std::complex<double>> remote_noise_rejection(
    const DpllEngine& engine, std::span<const double> freqs_hz,
    std::size_t ch = 0);

// --- tuning helper ----------------------------------------------------------

/// Shipped PI tuning recipe for a delay-limited loop. The integrator
/// crossover sits at the delay-bandwidth limit 1/(8*tau); the proportional
/// gain is the smaller of the pi/4-phase-margin solution and a 0.7
/// normalized-gain ceiling. The ceiling keeps |L| below unity at the
/// double-pass comb maxima (and, more generally, at every frequency above
/// the crossover of a delay-dominated plant), where a pure-margin solve
/// would oscillate.
struct PiTuning {
  double f_i_hz = 0.0;
  double kp_db = 0.0;
  double f_unity_hz = 0.0;        // realized unity-gain crossover
  double phase_margin_deg = 0.0;  // realized margin, from the analytic loop
};

PiTuning tune_pi(const LinkModel& plant, double fs_hz,
                 LpfSelect lpf = LpfSelect::mhz31);

/// Loop-filter configuration produced by the recipe (P+I enabled, Kp-mode
/// crossovers).
LoopFilterConfig tuned_filter_config(const LinkModel& plant, double fs_hz,
                                     LpfSelect lpf = LpfSelect::mhz31);

// --- engine-backed instrument ports ----------------------------------------

/// Closed-loop rejection port: the stimulus adds at the actuator summing
/// node and the response is the summed node itself, so the measured ratio
/// is exactly the sensitivity S = 1/(1+L).
class RejectionPort final : public VnaSystem {
 public:
  RejectionPort(EngineConfig cfg, std::size_t ch = 0);
  double fs() const override;
  void reset() override;
  double step(double stimulus) override;
  bool saturated() const override;
  std::unique_ptr<VnaSystem> clone() const override;

 private:
  EngineConfig cfg_;
  std::size_t ch_;
  std::unique_ptr<DpllEngine> engine_;
  std::vector<double> inject_;
};

/// Open-loop plant port: the loop is forced open, the stimulus drives the
/// actuator directly and the response is the measured frequency error in
/// Hz. Sweeping it yields the full open-loop transfer of plant, link and
/// demodulation chain (the Fig. 3 measurement).
class PlantPort final : public VnaSystem {
 public:
  PlantPort(EngineConfig cfg, std::size_t ch = 0);
  double fs() const override;
  void reset() override;
  double step(double stimulus) override;
  bool saturated() const override;
  std::unique_ptr<VnaSystem> clone() const override;

 private:
  EngineConfig cfg_;
  std::size_t ch_;
  std::unique_ptr<DpllEngine> engine_;
  std::vector<double> inject_;
};

/// Bare link response without the demodulation chain: actuator command in
/// volts to measured beat frequency in Hz, delays rounded to samples. Its
/// transfer function is kc_pass * z^-D_act * (1 + z^-2*D_link) * fs/(2*pi)
/// * (1 - z^-1) / ... i.e. the discrete realization of the analytic
/// link_response composition.
class LinkPlantSystem final : public VnaSystem {
 public:
  LinkPlantSystem(const LinkModel& model, double fs_hz);
  double fs() const override { return fs_; }
  void reset() override;
  double step(double stimulus) override;
  std::unique_ptr<VnaSystem> clone() const override;

 private:
  LinkModel model_;
  double fs_;
  double gain_pass_;
  std::size_t d_act_, d_link2_;
  DelayLine act_delay_;
  std::vector<double> corr_ring_;
  std::size_t pos_ = 0;
  double phi_corr_ = 0.0;
  double prev_meas_ = 0.0;
};

}  // namespace dpll
