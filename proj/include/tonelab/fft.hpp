#pragma once

#include <complex>
#include <cstddef>
#include <vector>

namespace tonelab {

/// Forward real FFT of length n (defaults to x.size(); x is zero-padded or
/// truncated to n). Returns the n/2+1 one-sided complex bins, unnormalized.
std::vector<std::complex<double>> rfft(const std::vector<double>& x,
                                       std::size_t n = 0);

/// Inverse of rfft back to n real samples, including the 1/n normalization.
std::vector<double> irfft(const std::vector<std::complex<double>>& spectrum,
                          std::size_t n);

}  // namespace tonelab
