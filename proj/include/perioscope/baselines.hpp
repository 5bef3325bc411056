#pragma once

#include <optional>
#include <string>
#include <vector>

#include "perioscope/series.hpp"

namespace perioscope {

struct BaselineResult {
    std::string method;
    bool periodic = false;
    std::optional<double> period;
    double score = 0.0;    // method-specific: max normalized ACF, g, or max LS power
    std::string metadata;  // normalization / threshold notes
};

// Classical ACF of the linearly interpolated, mean-removed series; period is
// the median distance between qualifying ACF peaks. Periodic iff at least
// one peak qualifies.
BaselineResult acf_med(const ObservedSeries& s);

// Conventional |FFT|^2 periodogram of the interpolated mean-removed series
// with Fisher's g-test; period = round(N / k_star).
BaselineResult fisher_baseline(const ObservedSeries& s, double alpha);

// Standard Lomb-Scargle periodogram on the observed samples only (no
// interpolation), sample-variance normalized, with the per-frequency time
// shift. Periodic iff the peak clears the classical false-alarm level at
// alpha. Periods from the supplied frequency grid.
BaselineResult lomb_scargle(const ObservedSeries& s, const std::vector<double>& freq_grid,
                            double alpha = 0.05);

// Frequencies covering periods 2..N/2 at 4x oversampling (spacing 1/(4N)).
std::vector<double> default_ls_grid(std::size_t n);

// Stable-field-name JSON rendering (field names shared with DetectionResult
// where they overlap).
std::string baseline_to_json(const BaselineResult& r);

}  // namespace perioscope
