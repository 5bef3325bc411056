#pragma once

#include <cstddef>
#include <vector>

namespace perioscope::fftutil {

// Smallest power of two >= n (and >= 1).
std::size_t next_pow2(std::size_t n);

// |X_k|^2 for the unnormalized DFT X of x, full length L = x.size(),
// k = 0..L-1 (upper half mirrored from the lower half).
std::vector<double> power_spectrum(const std::vector<double>& x);

// Re(X_k) for the unnormalized DFT of x, full length, mirrored. Intended for
// even-symmetric inputs whose spectrum is mathematically real.
std::vector<double> real_spectrum(const std::vector<double>& x);

// (1/L) * sum_k S_k e^{+2 pi i k t / L} for a real, even spectrum S given at
// full length L; returns the (mathematically real) sequence of length L.
std::vector<double> inverse_of_real_even_spectrum(const std::vector<double>& S);

}  // namespace perioscope::fftutil
