#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "perioscope/racf.hpp"

namespace perioscope {

struct HuberConfig {
    // When true, the Huber transition point is re-estimated every IRLS
    // iteration as 1.345 * (1.4826 * MAD of the current residuals); when
    // false, `delta` is used as a fixed transition point.
    bool adaptive_delta = true;
    double delta = 1.345;
    int irls_max_iter = 50;
    double irls_tol = 1e-8;  // relative change in beta between iterations
};

struct MPeriodogram {
    // Power per frequency bin k = 0..n_prime-1; Hermitian-symmetric
    // (power[k] == power[n_prime-k]) and nonnegative.
    std::vector<double> power;
    std::size_t n_prime = 0;
    int nonconverged_bins = 0;  // bins whose IRLS hit the iteration cap
};

// Per-bin IRLS diagnostics, filled when requested.
struct IrlsDiag {
    int iterations = 0;
    bool converged = true;
    // Largest increase of the Huber objective (for the transition point in
    // effect during that iteration) across iterations; descent means <= 0
    // up to rounding.
    double max_descent_violation = 0.0;
};

// x^2/2 inside the transition point, delta*|x| - delta^2/2 outside.
double huber_loss(double x, double delta);

// Huber regression of h_bar on [cos(2 pi k t / N'), sin(2 pi k t / N')] by
// IRLS, initialized at the least-squares solution; returns (N'/4)|beta|^2.
// Valid for 1 <= k <= N'/2 - 1.
double m_periodogram_bin(const std::vector<double>& h_bar, std::size_t k,
                         const HuberConfig& cfg, IrlsDiag* diag = nullptr);

// Full spectrum: bins 1..N'/2-1 from m_periodogram_bin (data-parallel), the
// Nyquist bin from a one-parameter Huber regression on the alternating-sign
// regressor, the DC bin fixed at 0 (input is mean-removed upstream), upper
// half mirrored.
MPeriodogram m_periodogram(const std::vector<double>& h_bar, const HuberConfig& cfg);

// Single-threaded reference implementation with identical output.
MPeriodogram m_periodogram_serial(const std::vector<double>& h_bar, const HuberConfig& cfg);

// Robust ACF: the missing-data estimator with the |FFT(h_bar)|^2 numerator
// replaced by the Huber spectrum (scaled to match the classical numerator
// when the loss degenerates to least squares). Pair counts are exact.
RobustAcf robust_acf_m(const std::vector<double>& x, const std::vector<std::uint8_t>& mask,
                       const HuberConfig& cfg);

}  // namespace perioscope
