// SPDX-License-Identifier: Apache-2.0
//
// Minimal radix-2 FFT. Self-contained so that spectral estimates are
// bit-reproducible across runs and thread counts.
#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace dpll {

/// In-place decimation-in-time FFT; size must be a power of two.
void fft_inplace(std::vector<std::complex<double>>& x);

/// One-sided spectrum of a real block: returns bins 0..n/2 of the DFT.
std::vector<std::complex<double>> rfft(const std::vector<double>& x);

bool is_power_of_two(std::size_t n);

}  // namespace dpll
