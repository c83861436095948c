// SPDX-License-Identifier: Apache-2.0

#include "dpll/instruments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "dpll/fft.hpp"
#include "dpll/numerics.hpp"

namespace dpll {

bool VnaResult::any_saturated() const {
  return std::find(saturated.begin(), saturated.end(), true) != saturated.end();
}

std::vector<double> log_grid(double f_start_hz, double f_stop_hz,
                             std::size_t points) {
  if (!(f_start_hz > 0.0) || !(f_stop_hz > f_start_hz) || points < 2) {
    throw std::invalid_argument("log_grid: bad span");
  }
  std::vector<double> out(points);
  const double lg0 = std::log10(f_start_hz);
  const double lg1 = std::log10(f_stop_hz);
  for (std::size_t k = 0; k < points; ++k) {
    out[k] = std::pow(10.0, lg0 + (lg1 - lg0) * static_cast<double>(k) /
                                static_cast<double>(points - 1));
  }
  return out;
}

namespace {

struct SnappedPoint {
  double freq_hz;
  std::size_t measure_samples;  // integer number of cycles
  std::size_t settle_samples;
};

// Snap each requested frequency so that cycles_per_point fits in an integer
// number of samples, then drop duplicates so the grid stays strictly
// increasing.
std::vector<SnappedPoint> snap_grid(std::span<const double> freqs, double fs,
                                    const VnaSettings& st) {
  std::vector<SnappedPoint> pts;
  pts.reserve(freqs.size());
  for (double f : freqs) {
    if (!(f > 0.0) || !(f < fs / 2.0)) {
      throw std::invalid_argument("vna_sweep: frequency outside (0, fs/2)");
    }
    const double cycles = static_cast<double>(st.cycles_per_point);
    const auto m = static_cast<std::size_t>(
        std::llround(cycles * fs / f));
    const double snapped = cycles * fs / static_cast<double>(m);
    const auto settle = std::max<std::size_t>(
        st.min_settle_samples,
        static_cast<std::size_t>(std::llround(
            static_cast<double>(st.settle_cycles) * fs / snapped)));
    if (!pts.empty() && snapped <= pts.back().freq_hz) continue;
    pts.push_back({snapped, m, settle});
  }
  return pts;
}

// Measure one point on a private copy of the system. The stimulus phase is
// continuous from settle into measurement; the correlation runs over an
// integer number of cycles so the reference offset cancels in the ratio.
void vna_point(const VnaSystem& prototype, const SnappedPoint& pt,
               const VnaSettings& st, std::complex<double>& response_out,
               bool& saturated_out) {
  auto sys = prototype.clone();
  sys->reset();
  const double fs = sys->fs();
  const double w = kTwoPi * pt.freq_hz / fs;
  const std::complex<double> rot(std::cos(w), -std::sin(w));
  std::complex<double> ph(1.0, 0.0);  // exp(-i*w*n)

  for (std::size_t n = 0; n < pt.settle_samples; ++n) {
    sys->step(st.amplitude * -ph.imag());  // amplitude * sin(w n + phi0)
    ph *= rot;
    if ((n & 0xfff) == 0xfff) ph /= std::abs(ph);
  }
  std::complex<double> acc_resp(0.0, 0.0);
  std::complex<double> acc_stim(0.0, 0.0);
  std::complex<double> acc_ph(0.0, 0.0);
  double sum_resp = 0.0;
  for (std::size_t n = 0; n < pt.measure_samples; ++n) {
    const double s = st.amplitude * -ph.imag();
    const double r = sys->step(s);
    acc_resp += r * ph;
    acc_stim += s * ph;
    acc_ph += ph;
    sum_resp += r;
    ph *= rot;
    if ((n & 0xfff) == 0xfff) ph /= std::abs(ph);
  }
  // remove the response DC before taking the ratio
  const double mean_resp = sum_resp / static_cast<double>(pt.measure_samples);
  response_out = (acc_resp - mean_resp * acc_ph) / acc_stim;
  saturated_out = sys->saturated();
}

VnaResult run_sweep(const VnaSystem& system, std::span<const double> freqs,
                    const VnaSettings& st, bool parallel) {
  const auto pts = snap_grid(freqs, system.fs(), st);
  VnaResult res;
  res.freqs_hz.resize(pts.size());
  res.response.resize(pts.size());
  res.saturated.assign(pts.size(), false);
  res.excitation_amplitude = st.amplitude;
  res.cycles_per_point = st.cycles_per_point;

  std::vector<char> sat(pts.size(), 0);
  const auto count = static_cast<std::int64_t>(pts.size());
#pragma omp parallel for schedule(dynamic) if (parallel)
  for (std::int64_t k = 0; k < count; ++k) {
    const auto i = static_cast<std::size_t>(k);
    bool s = false;
    vna_point(system, pts[i], st, res.response[i], s);
    res.freqs_hz[i] = pts[i].freq_hz;
    sat[i] = s ? 1 : 0;
  }
  for (std::size_t i = 0; i < pts.size(); ++i) res.saturated[i] = sat[i] != 0;
  return res;
}

}  // namespace

VnaResult vna_sweep(const VnaSystem& system, std::span<const double> freqs_hz,
                    const VnaSettings& settings) {
  return run_sweep(system, freqs_hz, settings, true);
}

VnaResult vna_sweep_serial(const VnaSystem& system,
                           std::span<const double> freqs_hz,
                           const VnaSettings& settings) {
  return run_sweep(system, freqs_hz, settings, false);
}

DitherEstimate dither_estimate(VnaSystem& system, double dither_freq_hz,
                               double dither_amplitude_v, double duration_s,
                               int blocks) {
  const double fs = system.fs();
  if (!(dither_freq_hz > 0.0) || !(dither_freq_hz < fs / 8.0)) {
    throw std::invalid_argument("dither_estimate: frequency must be << fs");
  }
  if (!(dither_amplitude_v > 0.0) || blocks < 2) {
    throw std::invalid_argument("dither_estimate: bad amplitude or blocks");
  }
  const auto half = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(fs / (2.0 * dither_freq_hz))));
  const std::size_t period = 2 * half;
  const double f_actual = fs / static_cast<double>(period);

  auto periods_total = static_cast<std::size_t>(duration_s * fs) / period;
  const std::size_t settle_periods = std::max<std::size_t>(4, periods_total / 10);
  if (periods_total < settle_periods + static_cast<std::size_t>(blocks)) {
    throw std::invalid_argument("dither_estimate: duration too short");
  }
  const std::size_t meas_periods =
      (periods_total - settle_periods) / blocks * blocks;

  system.reset();
  std::size_t pos = 0;
  auto square = [&](std::size_t p) {
    return p < half ? dither_amplitude_v : -dither_amplitude_v;
  };
  for (std::size_t n = 0; n < settle_periods * period; ++n) {
    system.step(square(pos));
    pos = (pos + 1) % period;
  }

  const std::size_t per_block = meas_periods / blocks * period;
  std::vector<double> block_gain(blocks, 0.0);
  for (int b = 0; b < blocks; ++b) {
    double in_phase = 0.0;
    for (std::size_t n = 0; n < per_block; ++n) {
      const double y = system.step(square(pos));
      // reference fundamental aligned with the square transitions
      in_phase += y * std::sin(kTwoPi * static_cast<double>(pos) /
                               static_cast<double>(period));
      pos = (pos + 1) % period;
    }
    // square wave fundamental amplitude is 4A/pi
    block_gain[b] = (2.0 * in_phase / static_cast<double>(per_block)) * kPi /
                    (4.0 * dither_amplitude_v);
  }

  double mean = 0.0;
  for (double g : block_gain) mean += g;
  mean /= blocks;
  double var = 0.0;
  for (double g : block_gain) var += (g - mean) * (g - mean);
  var /= (blocks - 1);
  const double stderr_abs = std::sqrt(var / blocks);

  DitherEstimate est;
  est.gain_hz_per_v = mean;
  est.confidence = mean == 0.0 ? std::numeric_limits<double>::infinity()
                               : stderr_abs / std::abs(mean);
  est.dither_freq_hz = f_actual;
  est.dither_amplitude_v = dither_amplitude_v;
  return est;
}

ZeroDeadTimeCounter::ZeroDeadTimeCounter(double fs_hz, double gate_time_s)
    : fs_hz_(fs_hz), gate_time_s_(gate_time_s) {
  if (!(fs_hz > 0.0) || !(gate_time_s > 0.0)) {
    throw std::invalid_argument("counter: fs and gate time must be > 0");
  }
  samples_per_gate_ =
      std::max<std::size_t>(1, static_cast<std::size_t>(
                                   std::llround(gate_time_s * fs_hz)));
  gate_time_s_ = static_cast<double>(samples_per_gate_) / fs_hz;
}

std::optional<CounterRecord> ZeroDeadTimeCounter::push(
    double phase_increment_rad) {
  gate_sum_ += phase_increment_rad;
  total_phase_ += phase_increment_rad;
  if (++in_gate_ < samples_per_gate_) return std::nullopt;
  CounterRecord rec;
  rec.gate_index = gate_index_++;
  rec.gate_time_s = gate_time_s_;
  rec.mean_freq_hz = gate_sum_ / (kTwoPi * gate_time_s_);
  gate_sum_ = 0.0;
  in_gate_ = 0;
  return rec;
}

void ZeroDeadTimeCounter::reset() {
  in_gate_ = 0;
  gate_sum_ = 0.0;
  total_phase_ = 0.0;
  gate_index_ = 0;
}

double PsdResult::integral() const {
  if (freqs_hz.size() < 2) return 0.0;
  const double df = freqs_hz[1] - freqs_hz[0];
  double sum = 0.0;
  for (double p : phase_psd) sum += p;
  return sum * df;
}

namespace {

PsdResult run_psd(std::span<const double> stream, double fs,
                  std::size_t seg_len, PsdKind kind, bool parallel) {
  if (!is_power_of_two(seg_len)) {
    throw std::invalid_argument("psd_estimate: segment length must be 2^n");
  }
  if (stream.size() < 2 * seg_len) {
    throw std::invalid_argument("psd_estimate: stream shorter than 2 segments");
  }
  const std::size_t hop = seg_len / 2;
  const std::size_t nseg = (stream.size() - seg_len) / hop + 1;
  const std::size_t nbins = seg_len / 2 + 1;

  std::vector<double> window(seg_len);
  double u = 0.0;
  for (std::size_t i = 0; i < seg_len; ++i) {
    window[i] = 0.5 - 0.5 * std::cos(kTwoPi * static_cast<double>(i) /
                                     static_cast<double>(seg_len));
    u += window[i] * window[i];
  }
  const double scale = 1.0 / (fs * u);

  std::vector<double> acc(nbins, 0.0);
  // segments are processed in bounded chunks: the FFTs run in parallel,
  // the accumulation stays in segment order so results do not depend on
  // the thread count
  const std::size_t chunk = 64;
  std::vector<std::vector<double>> per_seg(std::min(chunk, nseg));
  for (std::size_t base = 0; base < nseg; base += chunk) {
    const std::size_t in_chunk = std::min(chunk, nseg - base);
    const auto count = static_cast<std::int64_t>(in_chunk);
#pragma omp parallel for schedule(static) if (parallel)
    for (std::int64_t ci = 0; ci < count; ++ci) {
      const std::size_t k = base + static_cast<std::size_t>(ci);
      std::vector<double> seg(seg_len);
      const double* src = stream.data() + k * hop;
      double mean = 0.0;
      for (std::size_t i = 0; i < seg_len; ++i) mean += src[i];
      mean /= static_cast<double>(seg_len);
      for (std::size_t i = 0; i < seg_len; ++i) {
        seg[i] = (src[i] - mean) * window[i];
      }
      auto spec = rfft(seg);
      std::vector<double> p(nbins);
      for (std::size_t b = 0; b < nbins; ++b) {
        p[b] = std::norm(spec[b]) * scale;
        if (b != 0 && b != nbins - 1) p[b] *= 2.0;
      }
      per_seg[static_cast<std::size_t>(ci)] = std::move(p);
    }
    for (std::size_t ci = 0; ci < in_chunk; ++ci) {
      for (std::size_t b = 0; b < nbins; ++b) acc[b] += per_seg[ci][b];
    }
  }
  for (double& v : acc) v /= static_cast<double>(nseg);

  PsdResult res;
  res.fs_hz = fs;
  res.segment_count = nseg;
  res.freqs_hz.resize(nbins);
  for (std::size_t b = 0; b < nbins; ++b) {
    res.freqs_hz[b] = static_cast<double>(b) * fs / static_cast<double>(seg_len);
  }
  res.phase_psd.resize(nbins);
  res.freq_psd.resize(nbins);
  for (std::size_t b = 0; b < nbins; ++b) {
    const double f = res.freqs_hz[b];
    if (kind == PsdKind::phase) {
      res.phase_psd[b] = acc[b];
      res.freq_psd[b] = f * f * acc[b];
    } else {
      res.freq_psd[b] = acc[b];
      res.phase_psd[b] = b == 0 ? 0.0 : acc[b] / (f * f);
    }
  }
  // cumulative integrated phase noise, high frequency down
  res.integrated_phase.resize(nbins);
  const double df = fs / static_cast<double>(seg_len);
  double cum = 0.0;
  for (std::size_t b = nbins; b-- > 0;) {
    cum += res.phase_psd[b] * df;
    res.integrated_phase[b] = std::sqrt(cum);
  }
  return res;
}

}  // namespace

PsdResult psd_estimate(std::span<const double> stream, double fs_hz,
                       std::size_t segment_length, PsdKind kind) {
  return run_psd(stream, fs_hz, segment_length, kind, true);
}

PsdResult psd_estimate_serial(std::span<const double> stream, double fs_hz,
                              std::size_t segment_length, PsdKind kind) {
  return run_psd(stream, fs_hz, segment_length, kind, false);
}

DelaySystem::DelaySystem(double fs_hz, std::size_t delay_samples)
    : fs_(fs_hz), delay_(delay_samples),
      buf_(std::max<std::size_t>(delay_samples, 1), 0.0) {}

void DelaySystem::reset() {
  std::fill(buf_.begin(), buf_.end(), 0.0);
  pos_ = 0;
}

double DelaySystem::step(double stimulus) {
  if (delay_ == 0) return stimulus;
  const double out = buf_[pos_];
  buf_[pos_] = stimulus;
  pos_ = (pos_ + 1) % delay_;
  return out;
}

std::unique_ptr<VnaSystem> DelaySystem::clone() const {
  return std::make_unique<DelaySystem>(*this);
}

}  // namespace dpll
