#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "perioscope/mspec.hpp"
#include "perioscope/racf.hpp"
#include "perioscope/series.hpp"
#include "perioscope/trendfilter.hpp"

namespace perioscope {

struct DetectConfig {
    double alpha = 0.05;            // Fisher test significance threshold
    double peak_height_frac = 0.3;  // minimum ACF peak height, fraction of r_0
    TrendConfig trend_cfg;
    HuberConfig huber_cfg;
    // Full Huber M-periodogram numerator when true; plain |FFT|^2 numerator
    // ("fast mode") when false.
    bool use_m_periodogram = true;
    // Benchmark aid: when the peak-median/resolution-window consistency check
    // fails but the g-test is significant, fall back to the raw frequency-bin
    // period estimate instead of declaring non-periodic. Off by default; the
    // periodic => median-in-window invariant is intentionally relaxed when
    // this is on.
    bool bin_period_fallback = false;
};

struct DetectionResult {
    bool periodic = false;
    std::optional<int> period;
    double g_stat = 0.0;
    double p_value = 1.0;
    std::size_t k_star = 0;  // argmax frequency index on the transform grid
    std::vector<std::size_t> acf_peaks;
    std::optional<double> median_peak_distance;
    std::pair<double, double> rk_window_interval{0.0, 0.0};
    // diagnostics
    bool detrend_converged = false;
    int detrend_iterations = 0;
    MissingBlockReport missing;
    std::size_t invalid_lag_count = 0;
};

// Periodogram of the ACF via the Wiener-Khinchin route: invalid lags are
// filled by linear interpolation over the lag index, the sequence is evenly
// extended to length L = 2N-2, transformed, and the (mathematically real)
// spectrum is clamped at zero with the DC bin zeroed. Returns all L bins.
std::vector<double> wk_periodogram(const RobustAcf& acf);

// g = max/sum over exactly the bins passed in; the returned index is the
// 0-based argmax within that array (smallest index on ties). Callers slice
// away DC/Nyquist themselves. Throws when no bin is positive.
std::pair<double, std::size_t> fisher_g(const std::vector<double>& power);

// Exact null tail probability of Fisher's g over m ordinates:
// p = sum_{j=1}^{floor(1/g)} (-1)^{j-1} C(m,j) (1-jg)^{m-1}, evaluated in
// log-space and clamped to [0,1].
double fisher_pvalue(double g, std::size_t m);

// Strict local maxima of the r_0-normalized ACF over lags 2..N/2 with height
// at least height_frac and a positive pair count; plateaus resolve to their
// leftmost lag. Invalid lags are interpolation-filled for the neighbour
// comparisons but never reported as peaks.
std::vector<std::size_t> find_acf_peaks(const RobustAcf& acf, double height_frac);

// Resolution window of periodogram bin k on an n-point grid:
// [ (n/(k+1) + n/k)/2 - 1 , (n/k + n/(k-1))/2 + 1 ]. k = 1 gets upper bound
// n (a whole-series period is not detectable anyway). Throws for k = 0 or
// k > n/2 - 1.
std::pair<double, double> rk_window(std::size_t n, std::size_t k);

// Full pipeline: robust detrend, observed-mean removal, robust ACF (Huber
// numerator by default), Wiener-Khinchin periodogram, Fisher g-test, ACF
// peak refinement, and the resolution-window consistency gate.
DetectionResult detect_period(const ObservedSeries& s, const DetectConfig& cfg = {});

// Stable-field-name JSON rendering of a DetectionResult.
std::string detection_to_json(const DetectionResult& r);

}  // namespace perioscope
