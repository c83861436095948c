// SPDX-License-Identifier: Apache-2.0

#include "dpll/sim_engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dpll/version.hpp"

namespace dpll {

double max_bandwidth_hz(double tau_s) {
  if (!(tau_s > 0.0)) throw std::invalid_argument("max_bandwidth: tau <= 0");
  return 1.0 / (8.0 * tau_s);
}

const char* testpoint_name(Testpoint tp) {
  switch (tp) {
    case Testpoint::adc_in: return "adc_in";
    case Testpoint::i: return "i";
    case Testpoint::q: return "q";
    case Testpoint::phase: return "phase";
    case Testpoint::phase_increment: return "phase_increment";
    case Testpoint::filter_out: return "filter_out";
    case Testpoint::dac_out: return "dac_out";
  }
  return "?";
}

std::optional<Testpoint> testpoint_from_name(const std::string& name) {
  for (Testpoint tp :
       {Testpoint::adc_in, Testpoint::i, Testpoint::q, Testpoint::phase,
        Testpoint::phase_increment, Testpoint::filter_out, Testpoint::dac_out}) {
    if (name == testpoint_name(tp)) return tp;
  }
  return std::nullopt;
}

void EngineConfig::validate() const {
  if (!(fs_hz > 0.0)) throw std::invalid_argument("engine: fs must be > 0");
  if (channels.empty()) throw std::invalid_argument("engine: no channels");
  if (routing.scenario != Scenario::independent && channels.size() != 2) {
    throw std::invalid_argument(
        "engine: shared_input and cascaded scenarios need exactly 2 channels");
  }
  if (routing.vco_owner >= static_cast<int>(channels.size())) {
    throw std::invalid_argument("engine: vco owner out of range");
  }
  if (vco.enabled && routing.vco_owner < 0) {
    throw std::invalid_argument("engine: VCO enabled but no owner channel");
  }
  if (!(beat_amplitude > 0.0) || beat_amplitude > 1.0) {
    throw std::invalid_argument("engine: beat amplitude outside (0, 1]");
  }
  for (const auto& ch : channels) {
    if (!(ch.f_ref_hz >= 0.0) || !(ch.f_ref_hz < fs_hz / 2.0)) {
      throw std::invalid_argument("engine: f_ref outside [0, fs/2)");
    }
    ch.filter.validate();
  }
}

// Plant-side state: link noise, correction phase and the delayed taps that
// form the double-pass measurement and the remote observable.
struct DpllEngine::PlantState {
  double fs;
  std::size_t d_link;
  bool double_pass;
  std::vector<NoiseGenerator> freq_noise;
  std::vector<NoiseGenerator> phase_noise;
  double phi_fiber = 0.0;
  double phi_corr = 0.0;
  std::vector<double> corr_ring;
  std::vector<double> fiber_ring;
  std::size_t pos_c = 0, pos_f = 0;

  PlantState(const EngineConfig& cfg)
      : fs(cfg.fs_hz),
        d_link(static_cast<std::size_t>(
            std::llround(cfg.plant.tau_link_s * cfg.fs_hz))),
        double_pass(cfg.plant.double_pass),
        corr_ring(2 * d_link + 1, 0.0),
        fiber_ring(d_link + 1, 0.0) {
    for (const auto& spec : cfg.noise) {
      switch (spec.kind) {
        case NoiseSpec::Kind::white_frequency:
          freq_noise.emplace_back(spec, fs);
          break;
        case NoiseSpec::Kind::white_phase:
          phase_noise.emplace_back(spec, fs);
          break;
        case NoiseSpec::Kind::adc_snr:
          break;  // handled at the ADC, not in the link
      }
    }
  }

  struct Out {
    double meas;    // phase offset seen by the local detector
    double remote;  // phase delivered at the remote end
  };

  Out advance(double drive_hz) {
    double wp = 0.0;
    for (auto& g : phase_noise) wp += g.step();
    for (auto& g : freq_noise) phi_fiber += kTwoPi * g.step() / fs;
    const double phi_link = phi_fiber + wp;

    phi_corr += kTwoPi * drive_hz / fs;

    const std::size_t cs = corr_ring.size();
    corr_ring[pos_c] = phi_corr;
    const double corr_2d = corr_ring[(pos_c + cs - 2 * d_link) % cs];
    const double corr_1d = corr_ring[(pos_c + cs - d_link) % cs];
    pos_c = (pos_c + 1) % cs;

    const std::size_t fsz = fiber_ring.size();
    fiber_ring[pos_f] = phi_link;
    const double fiber_d = fiber_ring[(pos_f + fsz - d_link) % fsz];
    pos_f = (pos_f + 1) % fsz;

    Out o;
    if (double_pass) {
      // round-trip light passes the actuator twice (now and 2*tau ago) and
      // picks up the lumped remote noise once per pass at tau ago
      o.meas = phi_corr + corr_2d + 2.0 * fiber_d;
      o.remote = phi_link + corr_1d;
    } else {
      o.meas = phi_corr + phi_link;
      o.remote = o.meas;
    }
    return o;
  }
};

struct DpllEngine::ChannelState {
  DemodChannel demod;
  LoopFilterState lf;
  DelayLine act_delay;  // length D_act-1; the extra sample is the loop update
  double last_drive_hz = 0.0;
  double theta = 0.0;
  double w_beat = 0.0;
  std::size_t dither_half = 0;
  std::size_t dither_pos = 0;
  double dither_amp = 0.0;
  NoiseGenerator adc_noise;
  double act_gain_hz_per_v = 0.0;
  std::size_t plant_index = 0;

  ChannelState(const EngineConfig& cfg, const ChannelConfig& ch,
               std::size_t act_delay_samples)
      : demod(cfg.fs_hz, ch.f_ref_hz, ch.lpf, ch.sine_eval),
        act_delay(act_delay_samples - 1),
        adc_noise(NoiseSpec{NoiseSpec::Kind::adc_snr, cfg.adc.snr_t_db,
                            cfg.adc.noise_seed},
                  cfg.fs_hz, cfg.beat_amplitude) {
    w_beat = kTwoPi * (ch.f_ref_hz + cfg.beat_offset_hz) / cfg.fs_hz;
  }
};

DpllEngine::~DpllEngine() = default;
DpllEngine::DpllEngine(DpllEngine&&) noexcept = default;
DpllEngine& DpllEngine::operator=(DpllEngine&&) noexcept = default;

DpllEngine::DpllEngine(EngineConfig cfg) : cfg_(std::move(cfg)) {
  cfg_.validate();
  const double fs = cfg_.fs_hz;
  act_delay_samples_ = static_cast<std::size_t>(std::max<long long>(
      1, std::llround((cfg_.plant.tau_aom_s + cfg_.plant.tau_fpga_s) * fs)));
  link_delay_samples_ =
      static_cast<std::size_t>(std::llround(cfg_.plant.tau_link_s * fs));

  const std::size_t nch = cfg_.channels.size();
  const bool per_channel_plant =
      cfg_.routing.scenario == Scenario::independent;
  const std::size_t nplants = per_channel_plant ? nch : 1;
  for (std::size_t p = 0; p < nplants; ++p) {
    plants_.push_back(std::make_unique<PlantState>(cfg_));
  }

  samples_.resize(nch);
  for (std::size_t c = 0; c < nch; ++c) {
    const auto& ch = cfg_.channels[c];
    gains_.push_back(design_gains(ch.filter));
    auto st = std::make_unique<ChannelState>(cfg_, ch, act_delay_samples_);
    st->plant_index = per_channel_plant ? c : 0;
    if (std::isnan(ch.actuator_gain_hz_per_v)) {
      st->act_gain_hz_per_v =
          c == 0 ? cfg_.plant.kc_hz_per_v / (cfg_.plant.double_pass ? 2.0 : 1.0)
                 : 0.0;
    } else {
      st->act_gain_hz_per_v = ch.actuator_gain_hz_per_v;
    }
    set_dither_state(*st, ch.dither);
    chans_.push_back(std::move(st));
  }
}

void DpllEngine::set_dither_state(ChannelState& st, const DitherConfig& d) {
  if (!d.enabled || d.amplitude_v == 0.0) {
    st.dither_half = 0;
    st.dither_amp = 0.0;
    return;
  }
  st.dither_half = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(cfg_.fs_hz / (2.0 * d.freq_hz))));
  st.dither_amp = d.amplitude_v;
  st.dither_pos = 0;
}

void DpllEngine::set_dither(std::size_t ch, const DitherConfig& d) {
  cfg_.channels[ch].dither = d;
  set_dither_state(*chans_[ch], d);
}

double DpllEngine::actuator_output_hz(std::size_t c, double command_v) {
  auto& st = *chans_[c];
  if (cfg_.vco.enabled && cfg_.routing.vco_owner == static_cast<int>(c)) {
    // 16-bit word onto [0, full_scale]; -1 V maps to word 0
    const double span = static_cast<double>((1u << cfg_.vco.word_bits) - 1);
    double w = std::nearbyint((command_v + cfg_.vco.dc_offset_v + 1.0) / 2.0 *
                              span);
    if (w < 0.0) {
      w = 0.0;
      adc_clipped_ = true;
    } else if (w > span) {
      w = span;
      adc_clipped_ = true;
    }
    const double f = vco_map(static_cast<std::uint32_t>(w), cfg_.vco);
    return f - cfg_.vco.quiescent_offset_hz;
  }
  if (cfg_.quantize_dac) {
    const auto fmt = FixedFormat::dac14();
    command_v = dequantize(quantize(command_v, fmt), fmt);
  }
  return st.act_gain_hz_per_v * command_v;
}

void DpllEngine::step(std::span<const double> inject_u) {
  const double fs = cfg_.fs_hz;
  const std::size_t nch = chans_.size();

  // 1. delayed actuator commands reach the plant(s)
  std::vector<PlantState::Out> plant_out(plants_.size());
  if (cfg_.routing.scenario == Scenario::independent) {
    for (std::size_t c = 0; c < nch; ++c) {
      const double u_d = chans_[c]->act_delay.step(chans_[c]->last_drive_hz);
      plant_out[c] = plants_[c]->advance(u_d);
    }
  } else {
    double total = 0.0;
    for (std::size_t c = 0; c < nch; ++c) {
      total += chans_[c]->act_delay.step(chans_[c]->last_drive_hz);
    }
    plant_out[0] = plants_[0]->advance(total);
  }
  remote_phase_ = plant_out[0].remote;

  // 2. per channel: beat synthesis, ADC, demodulation, loop filter
  for (std::size_t c = 0; c < nch; ++c) {
    auto& st = *chans_[c];
    auto& out = samples_[c];
    const auto& chcfg = cfg_.channels[c];
    const bool shares_demod =
        cfg_.routing.scenario == Scenario::shared_input && c > 0;

    if (!shares_demod) {
      st.theta += st.w_beat;
      if (st.theta >= kPi) st.theta -= kTwoPi;
      const double meas = plant_out[st.plant_index].meas;
      double x = cfg_.beat_amplitude * std::cos(st.theta + meas) +
                 st.adc_noise.step();
      if (cfg_.adc.quantize) {
        const auto code = quantize(x, cfg_.adc.format);
        if (code == cfg_.adc.format.min_code() ||
            code == cfg_.adc.format.max_code()) {
          adc_clipped_ = true;
        }
        x = dequantize(code, cfg_.adc.format);
      }
      const auto d = st.demod.step(x);
      out.adc_in = x;
      out.i = d.i;
      out.q = d.q;
      out.phase = d.phase;
      out.phase_increment = d.increment;
      out.signal_loss = d.signal_loss;
    } else {
      const auto& master = samples_[0];
      out.adc_in = master.adc_in;
      out.i = master.i;
      out.q = master.q;
      out.phase = master.phase;
      out.phase_increment = master.phase_increment;
      out.signal_loss = master.signal_loss;
    }

    double err;
    if (cfg_.routing.scenario == Scenario::cascaded && c > 0) {
      // the first channel's control effort seeds the second loop
      err = chcfg.setpoint - samples_[c - 1].filter_out;
    } else {
      const double e_hz = out.phase_increment * fs / kTwoPi;
      err = chcfg.setpoint - e_hz;
    }

    const double u = chcfg.loop_closed ? filter_step(st.lf, gains_[c], err) : 0.0;
    out.filter_out = u;

    double dither = 0.0;
    if (st.dither_half > 0) {
      dither = st.dither_pos < st.dither_half ? st.dither_amp : -st.dither_amp;
      st.dither_pos = (st.dither_pos + 1) % (2 * st.dither_half);
    }
    const double inject = c < inject_u.size() ? inject_u[c] : 0.0;
    out.dac_out = u + dither + inject;
    st.last_drive_hz = actuator_output_hz(c, out.dac_out);
  }
}

bool DpllEngine::any_saturated() const {
  if (adc_clipped_) return true;
  for (const auto& ch : chans_) {
    if (ch->lf.saturated) return true;
  }
  return false;
}

void DpllEngine::clear_saturation() {
  adc_clipped_ = false;
  for (auto& ch : chans_) ch->lf.clear_saturation();
}

void DpllEngine::reset() {
  EngineConfig cfg = cfg_;
  *this = DpllEngine(std::move(cfg));
}

std::complex<double> DpllEngine::open_loop_response(double f_hz,
                                                    std::size_t ch) const {
  const auto& st = *chans_[ch];
  const std::complex<double> c =
      controller_response(gains_[ch], f_hz, cfg_.fs_hz);
  const std::complex<double> z1 =
      std::exp(std::complex<double>(0.0, -kTwoPi * f_hz / cfg_.fs_hz));
  std::complex<double> h = c * st.act_gain_hz_per_v *
                           st.demod.lowpass().response(f_hz) *
                           std::pow(z1, static_cast<double>(act_delay_samples_));
  if (cfg_.plant.double_pass) {
    h *= 1.0 + std::pow(z1, static_cast<double>(2 * link_delay_samples_));
  }
  return h;
}

void SimConfig::validate() const {
  engine.validate();
  if (duration_samples == 0) {
    throw std::invalid_argument("simulate: duration must be > 0");
  }
}

const std::vector<double>& SimTrace::column(const std::string& name) const {
  for (std::size_t i = 0; i < column_names.size(); ++i) {
    if (column_names[i] == name) return columns[i];
  }
  throw std::out_of_range("SimTrace: no column named " + name);
}

SimTrace run_simulation(const SimConfig& cfg) {
  cfg.validate();
  DpllEngine engine(cfg.engine);

  SimTrace trace;
  trace.fs_hz = cfg.engine.fs_hz;
  trace.version = kVersion;
  const std::size_t nch = cfg.engine.channels.size();
  for (std::size_t c = 0; c < nch; ++c) {
    for (Testpoint tp : cfg.record) {
      trace.column_names.push_back("ch" + std::to_string(c) + "." +
                                   testpoint_name(tp));
    }
  }
  if (cfg.record_remote_phase) trace.column_names.push_back("remote_phase");
  trace.columns.assign(trace.column_names.size(), {});
  for (auto& col : trace.columns) col.reserve(cfg.duration_samples);

  for (std::size_t n = 0; n < cfg.duration_samples; ++n) {
    engine.step();
    std::size_t col = 0;
    for (std::size_t c = 0; c < nch; ++c) {
      const auto& s = engine.channel(c);
      for (Testpoint tp : cfg.record) {
        double v = 0.0;
        switch (tp) {
          case Testpoint::adc_in: v = s.adc_in; break;
          case Testpoint::i: v = s.i; break;
          case Testpoint::q: v = s.q; break;
          case Testpoint::phase: v = s.phase; break;
          case Testpoint::phase_increment: v = s.phase_increment; break;
          case Testpoint::filter_out: v = s.filter_out; break;
          case Testpoint::dac_out: v = s.dac_out; break;
        }
        trace.columns[col++].push_back(v);
      }
    }
    if (cfg.record_remote_phase) {
      trace.columns[col].push_back(engine.remote_phase());
    }
  }
  return trace;
}

ClosedLoopPrediction closed_loop_prediction(
    const std::function<std::complex<double>(double)>& open_loop,
    std::span<const double> freqs_hz) {
  ClosedLoopPrediction p;
  p.freqs_hz.assign(freqs_hz.begin(), freqs_hz.end());
  p.sensitivity.reserve(freqs_hz.size());
  p.complementary.reserve(freqs_hz.size());
  for (double f : freqs_hz) {
    const std::complex<double> l = open_loop(f);
    const std::complex<double> s = 1.0 / (1.0 + l);
    p.sensitivity.push_back(s);
    p.complementary.push_back(l * s);
  }
  return p;
}

std::vector<std::complex<double>> remote_noise_rejection(
    const DpllEngine& engine, std::span<const double> freqs_hz,
    std::size_t ch) {
  std::vector<std::complex<double>> out;
  out.reserve(freqs_hz.size());
  const auto& cfg = engine.config();
  for (double f : freqs_hz) {
    const std::complex<double> l = engine.open_loop_response(f, ch);
    const std::complex<double> s = 1.0 / (1.0 + l);
    if (!cfg.plant.double_pass) {
      out.push_back(s);
      continue;
    }
    const std::complex<double> z1 =
        std::exp(std::complex<double>(0.0, -kTwoPi * f / cfg.fs_hz));
    const std::complex<double> beta =
        std::pow(z1, 2.0 * static_cast<double>(engine.link_delay_samples()));
    const std::complex<double> g = l / (1.0 + beta);
    out.push_back(s * (1.0 + g * (1.0 - beta)));
  }
  return out;
}

namespace {

struct LoopShape {
  double f_i, kp_norm, fs;
  std::size_t d_act, d_link;
  bool double_pass;
  const IqLowpass* lpf;

  std::complex<double> at(double f) const {
    const std::complex<double> z1 =
        std::exp(std::complex<double>(0.0, -kTwoPi * f / fs));
    std::complex<double> c =
        kp_norm * (1.0 + (f_i * kTwoPi / fs) / (1.0 - z1));
    std::complex<double> h =
        c * lpf->response(f) * std::pow(z1, static_cast<double>(d_act));
    if (double_pass) {
      h *= 0.5 * (1.0 + std::pow(z1, 2.0 * static_cast<double>(d_link)));
    }
    return h;
  }
};

}  // namespace

PiTuning tune_pi(const LinkModel& plant, double fs_hz, LpfSelect lpf) {
  const double tau = plant.total_delay_s();
  if (!(tau > 0.0)) throw std::invalid_argument("tune_pi: zero total delay");
  IqLowpass filt(lpf, fs_hz);

  PiTuning t;
  t.f_i_hz = max_bandwidth_hz(tau);
  const double tau_eff = tau + filt.group_delay_s();

  // pi/4-margin crossover for an integrator-plus-delay loop:
  // 2*pi*f*tau_eff + atan(f_i/f) = 3*pi/4
  double lo = t.f_i_hz * 1e-3;
  double hi = 0.5 / tau_eff;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double ph = kTwoPi * mid * tau_eff + std::atan(t.f_i_hz / mid);
    (ph < 0.75 * kPi ? lo : hi) = mid;
  }
  const double f_c = 0.5 * (lo + hi);

  double mag = std::sqrt(1.0 + (t.f_i_hz / f_c) * (t.f_i_hz / f_c)) *
               std::abs(filt.response(f_c));
  if (plant.double_pass) mag *= std::abs(std::cos(kTwoPi * f_c * plant.tau_link_s));
  const double kp_margin = 1.0 / mag;

  // high-frequency gain ceiling: |L| stays ~kp above the integrator corner
  // for a delay-dominated plant (and returns to kp at every double-pass
  // comb maximum), so kp > 1 would always oscillate
  constexpr double kKpCeiling = 0.7;
  const double kp_norm = std::min(kp_margin, kKpCeiling);
  t.kp_db = 20.0 * std::log10(kp_norm);

  // realized crossover and margin from the exact discrete loop
  LoopShape shape;
  shape.f_i = t.f_i_hz;
  shape.kp_norm = kp_norm;
  shape.fs = fs_hz;
  shape.d_act = static_cast<std::size_t>(std::max<long long>(
      1, std::llround((plant.tau_aom_s + plant.tau_fpga_s) * fs_hz)));
  shape.d_link = static_cast<std::size_t>(std::llround(plant.tau_link_s * fs_hz));
  shape.double_pass = plant.double_pass;
  shape.lpf = &filt;

  const auto grid = log_grid(t.f_i_hz * 1e-2, fs_hz * 0.49, 4000);
  double prev_mag = std::abs(shape.at(grid[0]));
  for (std::size_t k = 1; k < grid.size(); ++k) {
    const double m = std::abs(shape.at(grid[k]));
    if (prev_mag >= 1.0 && m < 1.0) {
      t.f_unity_hz = grid[k - 1];
      const double ph = std::arg(shape.at(grid[k - 1]));
      t.phase_margin_deg = 180.0 + ph * 180.0 / kPi;
      break;
    }
    prev_mag = m;
  }
  return t;
}

LoopFilterConfig tuned_filter_config(const LinkModel& plant, double fs_hz,
                                     LpfSelect lpf) {
  const PiTuning t = tune_pi(plant, fs_hz, lpf);
  LoopFilterConfig cfg;
  cfg.kp_db = t.kp_db;
  cfg.kc = plant.kc_hz_per_v;
  cfg.fs_hz = fs_hz;
  cfg.f_i_hz = t.f_i_hz;
  cfg.crossover_mode = CrossoverMode::relative_to_kp;
  cfg.enable_p = true;
  cfg.enable_i = true;
  return cfg;
}

RejectionPort::RejectionPort(EngineConfig cfg, std::size_t ch)
    : cfg_(std::move(cfg)), ch_(ch) {
  engine_ = std::make_unique<DpllEngine>(cfg_);
  inject_.assign(cfg_.channels.size(), 0.0);
}

double RejectionPort::fs() const { return cfg_.fs_hz; }

void RejectionPort::reset() {
  engine_ = std::make_unique<DpllEngine>(cfg_);
  std::fill(inject_.begin(), inject_.end(), 0.0);
}

double RejectionPort::step(double stimulus) {
  inject_[ch_] = stimulus;
  engine_->step(inject_);
  return engine_->channel(ch_).dac_out;
}

bool RejectionPort::saturated() const { return engine_->any_saturated(); }

std::unique_ptr<VnaSystem> RejectionPort::clone() const {
  return std::make_unique<RejectionPort>(cfg_, ch_);
}

PlantPort::PlantPort(EngineConfig cfg, std::size_t ch)
    : cfg_(std::move(cfg)), ch_(ch) {
  for (auto& c : cfg_.channels) {
    c.loop_closed = false;
    c.dither.enabled = false;
  }
  engine_ = std::make_unique<DpllEngine>(cfg_);
  inject_.assign(cfg_.channels.size(), 0.0);
}

double PlantPort::fs() const { return cfg_.fs_hz; }

void PlantPort::reset() {
  engine_ = std::make_unique<DpllEngine>(cfg_);
  std::fill(inject_.begin(), inject_.end(), 0.0);
}

double PlantPort::step(double stimulus) {
  inject_[ch_] = stimulus;
  engine_->step(inject_);
  return engine_->channel(ch_).phase_increment * cfg_.fs_hz / kTwoPi;
}

bool PlantPort::saturated() const { return engine_->any_saturated(); }

std::unique_ptr<VnaSystem> PlantPort::clone() const {
  return std::make_unique<PlantPort>(cfg_, ch_);
}

LinkPlantSystem::LinkPlantSystem(const LinkModel& model, double fs_hz)
    : model_(model),
      fs_(fs_hz),
      gain_pass_(model.kc_hz_per_v / (model.double_pass ? 2.0 : 1.0)),
      d_act_(static_cast<std::size_t>(std::max<long long>(
          1, std::llround((model.tau_aom_s + model.tau_fpga_s) * fs_hz)))),
      d_link2_(2 * static_cast<std::size_t>(
                       std::llround(model.tau_link_s * fs_hz))),
      act_delay_(d_act_),
      corr_ring_(d_link2_ + 1, 0.0) {}

void LinkPlantSystem::reset() {
  act_delay_.reset();
  std::fill(corr_ring_.begin(), corr_ring_.end(), 0.0);
  pos_ = 0;
  phi_corr_ = 0.0;
  prev_meas_ = 0.0;
}

double LinkPlantSystem::step(double stimulus) {
  const double u_d = act_delay_.step(stimulus);
  phi_corr_ += kTwoPi * gain_pass_ * u_d / fs_;
  const std::size_t cs = corr_ring_.size();
  corr_ring_[pos_] = phi_corr_;
  const double corr_2d = corr_ring_[(pos_ + cs - d_link2_) % cs];
  pos_ = (pos_ + 1) % cs;
  const double meas = model_.double_pass ? phi_corr_ + corr_2d : phi_corr_;
  const double e_hz = (meas - prev_meas_) * fs_ / kTwoPi;
  prev_meas_ = meas;
  return e_hz;
}

std::unique_ptr<VnaSystem> LinkPlantSystem::clone() const {
  auto copy = std::make_unique<LinkPlantSystem>(model_, fs_);
  return copy;
}

}  // namespace dpll
