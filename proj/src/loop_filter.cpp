// SPDX-License-Identifier: Apache-2.0

#include "dpll/loop_filter.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "dpll/numerics.hpp"

namespace dpll {

void LoopFilterConfig::validate() const {
  if (!(fs_hz > 0.0)) throw std::invalid_argument("loop filter: fs must be > 0");
  if (kc == 0.0 || !std::isfinite(kc)) {
    throw std::invalid_argument("loop filter: kc must be nonzero");
  }
  if (!std::isfinite(kp_db)) throw std::invalid_argument("loop filter: kp_db not finite");
  auto check_crossover = [this](bool enabled, double f, const char* what) {
    if (enabled && !(f > 0.0 && f < fs_hz / 2.0)) {
      throw std::invalid_argument(std::string("loop filter: ") + what +
                                  " crossover outside (0, fs/2)");
    }
  };
  check_crossover(enable_i, f_i_hz, "integrator");
  check_crossover(enable_ii, f_ii_hz, "double integrator");
  check_crossover(enable_d, f_d_hz, "differentiator");
  check_crossover(enable_d, f_df_hz, "differentiator roll-off");
  if (enable_ii && !enable_i) {
    throw std::invalid_argument(
        "loop filter: the II branch requires the I branch (its crossover is "
        "defined against the integrator)");
  }
}

GainSet design_gains(const LoopFilterConfig& cfg) {
  cfg.validate();
  GainSet g;
  const double inv_kc = 1.0 / cfg.kc;
  const double kp = std::pow(10.0, cfg.kp_db / 20.0) * inv_kc;
  const double base =
      cfg.crossover_mode == CrossoverMode::relative_to_kp ? kp : inv_kc;
  if (cfg.enable_p) g.kp = kp;
  if (cfg.enable_i) g.ki = base * cfg.f_i_hz * kTwoPi / cfg.fs_hz;
  if (cfg.enable_ii) g.kii = g.ki * cfg.f_ii_hz * kTwoPi / cfg.fs_hz;
  if (cfg.enable_d) {
    g.kd = base / cfg.f_d_hz * cfg.fs_hz / kTwoPi;
    g.d_filter_coeff = cfg.f_df_hz * kTwoPi / cfg.fs_hz;
  }
  return g;
}

void LoopFilterState::reset() {
  integrator_acc = 0.0;
  double_integrator_acc = 0.0;
  previous_input = 0.0;
  d_filter_state = 0.0;
  saturated = false;
}

double filter_step(LoopFilterState& s, const GainSet& g, double e) {
  const double lim = s.saturation_limit;
  auto clamp = [&](double v) {
    if (v > lim) {
      s.saturated = true;
      return lim;
    }
    if (v < -lim) {
      s.saturated = true;
      return -lim;
    }
    return v;
  };

  s.integrator_acc = clamp(s.integrator_acc + g.ki * e);
  if (g.kii != 0.0 && g.ki != 0.0) {
    s.double_integrator_acc =
        clamp(s.double_integrator_acc + (g.kii / g.ki) * s.integrator_acc);
  }
  const double d_in = g.kd * (e - s.previous_input);
  s.previous_input = e;
  s.d_filter_state += g.d_filter_coeff * (d_in - s.d_filter_state);

  return clamp(g.kp * e + s.integrator_acc + s.double_integrator_acc +
               s.d_filter_state);
}

std::complex<double> controller_response(const GainSet& g, double f_hz,
                                         double fs_hz) {
  if (!(f_hz > 0.0 && f_hz < fs_hz / 2.0)) {
    throw std::out_of_range("controller_response: f outside (0, fs/2)");
  }
  const std::complex<double> z1 =
      std::exp(std::complex<double>(0.0, -kTwoPi * f_hz / fs_hz));
  const std::complex<double> one_minus = 1.0 - z1;
  std::complex<double> h = g.kp;
  if (g.ki != 0.0) h += g.ki / one_minus;
  if (g.kii != 0.0) h += g.kii / (one_minus * one_minus);
  if (g.kd != 0.0) {
    const double a = g.d_filter_coeff;
    h += g.kd * one_minus * a / (1.0 - (1.0 - a) * z1);
  }
  return h;
}

}  // namespace dpll
