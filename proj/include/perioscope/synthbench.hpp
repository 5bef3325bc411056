#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "perioscope/detector.hpp"
#include "perioscope/series.hpp"

namespace perioscope {

enum class Waveform { sine, square, triangle };
enum class TrendKind { none, linear, piecewise };
enum class MissingMode { single_block, multi_block, scattered };

// One piece of a piecewise-linear trend: from `start` onward the slope is
// `slope`, and the level jumps by `level_shift` at `start` (0 keeps the
// trend continuous; nonzero models an abrupt level shift).
struct PiecewiseSegment {
    std::size_t start = 0;
    double slope = 0.0;
    double level_shift = 0.0;
};

struct SynthSpec {
    std::size_t n = 480;
    int period = 24;
    Waveform waveform = Waveform::sine;
    TrendKind trend = TrendKind::none;
    double linear_slope = 0.0;              // TrendKind::linear
    std::vector<PiecewiseSegment> segments; // TrendKind::piecewise
    double noise_sigma = 0.0;
    double outlier_ratio = 0.0;       // in [0, 0.5)
    double outlier_amp_sigmas = 5.0;  // amplitude in std units of the clean series
    double missing_ratio = 0.0;       // in [0, 0.5)
    MissingMode missing_mode = MissingMode::single_block;
    int block_count = 2;              // MissingMode::multi_block
    std::uint64_t seed = 0;
};

// Deterministic synthetic series: waveform + trend + Gaussian noise, then
// missing positions, then outliers of amplitude outlier_amp_sigmas times the
// clean (pre-corruption) standard deviation at uniformly chosen observed
// positions. Returns the series and the ground-truth period.
std::pair<ObservedSeries, int> generate(const SynthSpec& spec);

// The trend component alone (for trend-recovery oracles).
std::vector<double> trend_component(const SynthSpec& spec);

struct CellStats {
    double precision = 0.0;      // exact integer period match ratio
    double precision_pm1 = 0.0;  // |estimate - truth| <= 1, reported only
    int trials = 0;
    double mean_runtime_ms = 0.0;
};

struct PrecisionReport {
    std::vector<std::pair<double, double>> cells;  // (missing_ratio, outlier_ratio)
    std::vector<std::string> algorithms;
    // stats[a][c]: algorithm a on cell c.
    std::vector<std::vector<CellStats>> stats;
};

struct BenchOptions {
    SynthSpec base;                 // template; missing/outlier ratios come from the grid
    std::uint64_t base_seed = 1234567;
    DetectConfig detect_cfg;        // configuration for the "proposed" algorithm
    double alpha = 0.05;            // baselines' significance level
    // Trial variety: the true period cycles through these (period <= n/4 each).
    std::vector<int> periods = {12, 24, 30, 48};
    bool cycle_waveforms = true;
};

// Sweeps grid x trials x algorithms. Algorithms: "proposed", "acf_med",
// "fisher", "lomb_scargle". Deterministic for a fixed base seed; trials are
// data-parallel and aggregated in trial order.
PrecisionReport run_benchmark(const std::vector<std::pair<double, double>>& grid, int trials,
                              const std::vector<std::string>& algorithms,
                              const BenchOptions& opts = {});

// JSON / plain-text table renderings. Runtimes are omitted unless
// include_timings is set so that repeated identical invocations produce
// byte-identical output.
std::string report_to_json(const PrecisionReport& rep, bool include_timings = false);
std::string report_to_text(const PrecisionReport& rep);

}  // namespace perioscope
