// SPDX-License-Identifier: Apache-2.0

#include "dpll/plant.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include "dpll/numerics.hpp"

namespace dpll {

double vco_map(std::uint32_t code, const VcoSpec& spec) {
  const std::uint32_t top = (1u << spec.word_bits) - 1;
  if (code > top) throw std::out_of_range("vco_map: code exceeds word width");
  // divide by 2^bits - 1 so both documented endpoints are exact; the
  // alternative /2^bits convention would read 954 Hz low at full scale
  return static_cast<double>(code) * spec.full_scale_hz /
         static_cast<double>(top);
}

double dac_map(std::int32_t code, const DacSpec& spec) {
  const std::int32_t lo = -(1 << (spec.bits - 1));
  const std::int32_t hi = (1 << (spec.bits - 1)) - 1;
  if (code < lo || code > hi) {
    throw std::out_of_range("dac_map: code outside signed range");
  }
  const double half_span = (spec.v_max - spec.v_min) / 2.0;
  return static_cast<double>(code) / static_cast<double>(-lo) * half_span +
         (spec.v_max + spec.v_min) / 2.0;
}

DelayLine::DelayLine(std::size_t delay_samples)
    : delay_(delay_samples), buf_(std::max<std::size_t>(delay_samples, 1), 0.0) {}

double DelayLine::step(double x) {
  if (delay_ == 0) return x;
  const double out = buf_[pos_];
  buf_[pos_] = x;
  pos_ = (pos_ + 1) % delay_;
  return out;
}

void DelayLine::reset() {
  std::fill(buf_.begin(), buf_.end(), 0.0);
  pos_ = 0;
}

AomVcoResponse AomVcoResponse::pure_delay(double tau_s) {
  AomVcoResponse r;
  r.tau_s_ = tau_s;
  return r;
}

AomVcoResponse AomVcoResponse::from_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("AomVcoResponse: cannot open " + path);
  AomVcoResponse r;
  r.measured_ = true;
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("AomVcoResponse: empty file " + path);
  }
  if (line.find("freq_hz") == std::string::npos) {
    throw std::runtime_error(
        "AomVcoResponse: missing freq_hz,mag_db,phase_deg header in " + path);
  }
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    double f, m, p;
    char c1, c2;
    if (!(ss >> f >> c1 >> m >> c2 >> p) || c1 != ',' || c2 != ',') {
      throw std::runtime_error("AomVcoResponse: parse error at " + path + ":" +
                               std::to_string(lineno));
    }
    if (!r.freqs_.empty() && f <= r.freqs_.back()) {
      throw std::runtime_error(
          "AomVcoResponse: frequencies must be strictly increasing (" + path +
          ":" + std::to_string(lineno) + ")");
    }
    r.freqs_.push_back(f);
    r.mag_db_.push_back(m);
    r.phase_deg_.push_back(p);
  }
  if (r.freqs_.size() < 2) {
    throw std::runtime_error("AomVcoResponse: need at least two rows in " + path);
  }
  return r;
}

std::complex<double> AomVcoResponse::at(double f_hz) const {
  if (!measured_) {
    return std::exp(std::complex<double>(0.0, -kTwoPi * f_hz * tau_s_));
  }
  const auto& f = freqs_;
  double mag_db, ph_deg;
  if (f_hz <= f.front()) {
    mag_db = mag_db_.front();
    ph_deg = phase_deg_.front();
  } else if (f_hz >= f.back()) {
    mag_db = mag_db_.back();
    ph_deg = phase_deg_.back();
  } else {
    const auto it = std::upper_bound(f.begin(), f.end(), f_hz);
    const std::size_t j = static_cast<std::size_t>(it - f.begin());
    const double t = (f_hz - f[j - 1]) / (f[j] - f[j - 1]);
    mag_db = mag_db_[j - 1] + t * (mag_db_[j] - mag_db_[j - 1]);
    ph_deg = phase_deg_[j - 1] + t * (phase_deg_[j] - phase_deg_[j - 1]);
  }
  return std::polar(std::pow(10.0, mag_db / 20.0), ph_deg * kPi / 180.0);
}

std::complex<double> link_response(double f_hz, const LinkModel& m,
                                   const AomVcoResponse& aom_vco) {
  std::complex<double> h = aom_vco.at(f_hz);
  const double theta = kTwoPi * f_hz * m.tau_link_s;
  h *= std::exp(std::complex<double>(0.0, -theta));
  if (m.double_pass) h *= std::cos(theta);
  return h;
}

namespace {

std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// uniform in (0, 1]: never zero, so log() below is safe
double uniform_open(std::uint64_t seed, std::uint64_t ctr) {
  const std::uint64_t v = splitmix64(seed ^ splitmix64(ctr));
  return (static_cast<double>(v >> 11) + 1.0) * 0x1.0p-53;
}

}  // namespace

NoiseGenerator::NoiseGenerator(const NoiseSpec& spec, double fs_hz,
                               double carrier_amplitude)
    : spec_(spec) {
  if (spec.level < 0.0) {
    throw std::invalid_argument("NoiseGenerator: level must be >= 0");
  }
  switch (spec.kind) {
    case NoiseSpec::Kind::white_phase:
    case NoiseSpec::Kind::white_frequency:
      // one-sided PSD S0 over [0, fs/2] gives per-sample variance S0*fs/2
      sigma_ = std::sqrt(spec.level * fs_hz / 2.0);
      break;
    case NoiseSpec::Kind::adc_snr:
      sigma_ = spec.level <= 0.0
                   ? 0.0
                   : carrier_amplitude / std::sqrt(2.0) *
                         std::pow(10.0, -spec.level / 20.0);
      break;
  }
}

double NoiseGenerator::unit_normal(std::uint64_t n) const {
  const double u1 = uniform_open(spec_.seed, 2 * n);
  const double u2 = uniform_open(spec_.seed, 2 * n + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(kTwoPi * u2);
}

double NoiseGenerator::step() {
  if (sigma_ == 0.0) {
    ++n_;
    return 0.0;
  }
  return sigma_ * unit_normal(n_++);
}

double total_latency(std::span<const double> parts_s) {
  for (double p : parts_s) {
    if (p < 0.0) throw std::invalid_argument("total_latency: negative part");
  }
  return std::accumulate(parts_s.begin(), parts_s.end(), 0.0);
}

}  // namespace dpll
