// SPDX-License-Identifier: Apache-2.0

#include "dpll/numerics.hpp"

#include <cmath>
#include <stdexcept>

namespace dpll {

std::int64_t FixedFormat::min_code() const {
  if (!is_signed) return 0;
  return -(std::int64_t{1} << (total_bits - 1));
}

std::int64_t FixedFormat::max_code() const {
  if (!is_signed) {
    if (total_bits >= 64) return INT64_MAX;
    return (std::int64_t{1} << total_bits) - 1;
  }
  return (std::int64_t{1} << (total_bits - 1)) - 1;
}

bool FixedFormat::valid() const {
  return total_bits >= 1 && total_bits <= 63 && scale > 0.0 &&
         std::isfinite(scale);
}

bool AdcSpec::valid() const {
  return bits >= 1 && fs_hz > 0.0 && snr_t_db <= 6.02 * bits + 1.76;
}

std::int64_t quantize(double x, const FixedFormat& fmt) {
  if (!fmt.valid()) throw std::invalid_argument("quantize: invalid format");
  const double lo = static_cast<double>(fmt.min_code());
  const double hi = static_cast<double>(fmt.max_code());
  // nearbyint rounds half-to-even in the default rounding mode
  const double code = std::nearbyint(x / fmt.scale);
  if (std::isnan(code)) return 0;
  if (code <= lo) return fmt.min_code();
  if (code >= hi) return fmt.max_code();
  return static_cast<std::int64_t>(code);
}

double dequantize(std::int64_t code, const FixedFormat& fmt) {
  return static_cast<double>(code) * fmt.scale;
}

double wrap_phase(double x) {
  if (!std::isfinite(x)) {
    throw std::invalid_argument("wrap_phase: non-finite input");
  }
  // Two-word reduction keeps the error ~1 ulp even after millions of turns.
  constexpr double two_pi_hi = 6.283185307179586232e+00;
  constexpr double two_pi_lo = 2.449293598294706354e-16;
  const double k = std::nearbyint(x * (1.0 / kTwoPi));
  double r = std::fma(-k, two_pi_hi, x);
  r -= k * two_pi_lo;
  if (r >= kPi) {
    r -= two_pi_hi;
  } else if (r < -kPi) {
    r += two_pi_hi;
  }
  return r;
}

double spectral_snr_db(const AdcSpec& spec, double bw_hz) {
  if (!(bw_hz > 0.0) || bw_hz > spec.fs_hz / 2.0) {
    throw std::out_of_range("spectral_snr_db: bandwidth outside (0, fs/2]");
  }
  return spec.snr_t_db + 10.0 * std::log10(spec.fs_hz / (2.0 * bw_hz));
}

double enob_bits(double snr_t_db) { return (snr_t_db - 1.76) / 6.02; }

}  // namespace dpll
