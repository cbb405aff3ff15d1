#pragma once

#include <complex>
#include <span>
#include <vector>

namespace driftbench::fft {

using Complex = std::complex<double>;

/// Full n-point forward transform of a real sequence, X[f] = sum_t x[t] e^{-2 pi i f t / n}.
std::vector<Complex> forward(std::span<const double> x);

/// Normalised inverse transform, x[t] = (1/n) sum_f X[f] e^{2 pi i f t / n}.
std::vector<Complex> inverse(std::span<const Complex> spectrum);

}  // namespace driftbench::fft
