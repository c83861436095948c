// SPDX-License-Identifier: Apache-2.0

#include "dpll/dsp_core.hpp"

#include <array>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace dpll {

namespace {

bool is_integral(double v) { return std::nearbyint(v) == v; }

// round-half-even of a 128-bit ratio num / den
std::uint64_t div_round_half_even(unsigned __int128 num, std::uint64_t den) {
  unsigned __int128 q = num / den;
  unsigned __int128 r = num % den;
  unsigned __int128 twice = 2 * r;
  if (twice > den || (twice == den && (q & 1))) ++q;
  return static_cast<std::uint64_t>(q);
}

}  // namespace

std::uint64_t tuning_word(double f_ref_hz, double f_clk_hz) {
  if (!(f_clk_hz > 0.0) || !(f_ref_hz >= 0.0) || !(f_ref_hz < f_clk_hz)) {
    throw std::out_of_range("tuning_word: requires 0 <= f_ref < f_clk");
  }
  if (is_integral(f_ref_hz) && is_integral(f_clk_hz)) {
    const auto num = static_cast<unsigned __int128>(f_ref_hz) * kNcoModulus;
    return div_round_half_even(num, static_cast<std::uint64_t>(f_clk_hz));
  }
  const long double ratio =
      static_cast<long double>(f_ref_hz) / static_cast<long double>(f_clk_hz);
  return static_cast<std::uint64_t>(
      rintl(ratio * static_cast<long double>(kNcoModulus)));
}

double nco_frequency(std::uint64_t k, double f_clk_hz) {
  return static_cast<double>(k) / static_cast<double>(kNcoModulus) * f_clk_hz;
}

namespace {

// 16-bit truncated-phase table, built once. Entry n holds cos/sin of
// 2*pi*n/65536.
const std::array<NcoOutput, 65536>& sine_table() {
  static const auto table = [] {
    auto t = std::make_unique<std::array<NcoOutput, 65536>>();
    for (std::size_t n = 0; n < t->size(); ++n) {
      const double ph = kTwoPi * static_cast<double>(n) / 65536.0;
      (*t)[n] = {std::cos(ph), std::sin(ph)};
    }
    return t;
  }();
  return *table;
}

}  // namespace

NcoOutput nco_step(NcoState& state, SineEval eval) {
  NcoOutput out;
  if (eval == SineEval::lut16) {
    out = sine_table()[state.accumulator >> 32];
  } else {
    const double ph =
        kTwoPi * (static_cast<double>(state.accumulator) /
                  static_cast<double>(kNcoModulus));
    out = {std::cos(ph), std::sin(ph)};
  }
  state.accumulator = (state.accumulator + state.tuning_word) & kNcoMask;
  return out;
}

IqSample iq_demodulate(double x, const NcoOutput& nco, std::int64_t t_index) {
  return {x * nco.cos_out, -x * nco.sin_out, t_index};
}

double lpf_cutoff_hz(LpfSelect sel, double fs_hz) {
  switch (sel) {
    case LpfSelect::mhz3_75: return fs_hz * (3.75 / 125.0);
    case LpfSelect::mhz15_5: return fs_hz * (15.5 / 125.0);
    case LpfSelect::mhz31: return fs_hz * (31.0 / 125.0);
  }
  throw std::invalid_argument("lpf_cutoff_hz: bad selection");
}

Biquad Biquad::lowpass(double f0_hz, double fs_hz, double q) {
  if (!(f0_hz > 0.0) || !(f0_hz < fs_hz / 2.0)) {
    throw std::invalid_argument("Biquad::lowpass: cutoff outside (0, fs/2)");
  }
  const double w0 = kTwoPi * f0_hz / fs_hz;
  const double alpha = std::sin(w0) / (2.0 * q);
  const double cw = std::cos(w0);
  const double a0 = 1.0 + alpha;
  return Biquad((1.0 - cw) / 2.0 / a0, (1.0 - cw) / a0, (1.0 - cw) / 2.0 / a0,
                -2.0 * cw / a0, (1.0 - alpha) / a0);
}

double Biquad::step(double x) {
  const double y = b0_ * x + z1_;
  z1_ = b1_ * x - a1_ * y + z2_;
  z2_ = b2_ * x - a2_ * y;
  return y;
}

void Biquad::reset() { z1_ = z2_ = 0.0; }

std::complex<double> Biquad::response(double f_hz, double fs_hz) const {
  const std::complex<double> z = std::exp(
      std::complex<double>(0.0, -kTwoPi * f_hz / fs_hz));
  return (b0_ + b1_ * z + b2_ * z * z) / (1.0 + a1_ * z + a2_ * z * z);
}

namespace {
// Pole quality factors of a 4th-order Butterworth split into two sections.
constexpr double kButterQ1 = 0.54119610014619698;
constexpr double kButterQ2 = 1.3065629648763766;
}  // namespace

IqLowpass::IqLowpass(LpfSelect sel, double fs_hz) : fs_hz_(fs_hz) {
  const double fc = lpf_cutoff_hz(sel, fs_hz);
  i1_ = Biquad::lowpass(fc, fs_hz, kButterQ1);
  i2_ = Biquad::lowpass(fc, fs_hz, kButterQ2);
  q1_ = i1_;
  q2_ = i2_;
}

IqSample IqLowpass::step(const IqSample& s) {
  return {i2_.step(i1_.step(s.i)), q2_.step(q1_.step(s.q)), s.t_index};
}

void IqLowpass::reset() {
  i1_.reset();
  i2_.reset();
  q1_.reset();
  q2_.reset();
}

std::complex<double> IqLowpass::response(double f_hz) const {
  return i1_.response(f_hz, fs_hz_) * i2_.response(f_hz, fs_hz_);
}

double IqLowpass::group_delay_s() const {
  const double f = fs_hz_ * 1e-5;
  return -std::arg(response(f)) / (kTwoPi * f);
}

std::optional<double> phase_extract(const IqSample& s) {
  if (s.i == 0.0 && s.q == 0.0) return std::nullopt;
  return std::atan2(s.q, s.i);
}

double phase_increment(double phase_now_rad, double phase_prev_rad) {
  return wrap_phase(phase_now_rad - phase_prev_rad);
}

DemodChannel::DemodChannel(double fs_hz, double f_ref_hz, LpfSelect sel,
                           SineEval eval)
    : fs_hz_(fs_hz), eval_(eval), lpf_(sel, fs_hz) {
  nco_.tuning_word = tuning_word(f_ref_hz, fs_hz);
  nco_.f_clk_hz = fs_hz;
}

DemodChannel::Output DemodChannel::step(double x) {
  const NcoOutput ref = nco_step(nco_, eval_);
  const IqSample filtered = lpf_.step(iq_demodulate(x, ref, t_));
  ++t_;
  Output out;
  out.i = filtered.i;
  out.q = filtered.q;
  const auto phase = phase_extract(filtered);
  if (phase) {
    out.phase = *phase;
    out.signal_loss = false;
  } else {
    out.phase = prev_phase_;  // hold on signal loss
    out.signal_loss = true;
  }
  out.increment = phase_increment(out.phase, prev_phase_);
  prev_phase_ = out.phase;
  return out;
}

void DemodChannel::reset() {
  nco_.accumulator = 0;
  lpf_.reset();
  prev_phase_ = 0.0;
  t_ = 0;
}

}  // namespace dpll
