#include "perioscope/synthbench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "perioscope/baselines.hpp"

namespace perioscope {

namespace {

double waveform_value(Waveform w, double phase01) {
    // phase01 in [0,1) within one cycle, unit amplitude.
    switch (w) {
        case Waveform::sine:
            return std::sin(2.0 * M_PI * phase01);
        case Waveform::square:
            return phase01 < 0.5 ? 1.0 : -1.0;
        case Waveform::triangle: {
            // rises 0 -> 1 -> 0 -> -1 -> 0 across the cycle
            const double x = phase01 < 0.25   ? 4.0 * phase01
                             : phase01 < 0.75 ? 2.0 - 4.0 * phase01
                                              : 4.0 * phase01 - 4.0;
            return x;
        }
    }
    return 0.0;
}

void validate_spec(const SynthSpec& spec) {
    if (spec.period < 2) throw std::runtime_error("synth spec: period must be >= 2");
    if (static_cast<std::size_t>(spec.period) * 4 > spec.n)
        throw std::runtime_error("synth spec: need period <= n/4 (at least 4 cycles)");
    if (spec.noise_sigma < 0) throw std::runtime_error("synth spec: negative noise sigma");
    if (spec.outlier_ratio < 0 || spec.outlier_ratio >= 0.5)
        throw std::runtime_error("synth spec: outlier ratio must be in [0, 0.5)");
    if (spec.missing_ratio < 0 || spec.missing_ratio >= 0.5)
        throw std::runtime_error("synth spec: missing ratio must be in [0, 0.5)");
    if (spec.missing_mode == MissingMode::multi_block && spec.block_count < 1)
        throw std::runtime_error("synth spec: block count must be >= 1");
}

std::uint64_t mix_seed(std::uint64_t base, std::uint64_t cell, std::uint64_t trial) {
    // splitmix64-style mixing so nearby (cell, trial) indices decorrelate.
    std::uint64_t z = base + 0x9e3779b97f4a7c15ULL * (cell * 1000003ULL + trial + 1ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

std::vector<double> trend_component(const SynthSpec& spec) {
    std::vector<double> trend(spec.n, 0.0);
    switch (spec.trend) {
        case TrendKind::none:
            break;
        case TrendKind::linear:
            for (std::size_t t = 0; t < spec.n; ++t)
                trend[t] = spec.linear_slope * static_cast<double>(t);
            break;
        case TrendKind::piecewise: {
            auto segs = spec.segments;
            std::sort(segs.begin(), segs.end(),
                      [](const PiecewiseSegment& a, const PiecewiseSegment& b) {
                          return a.start < b.start;
                      });
            double level = 0.0;
            double slope = 0.0;
            std::size_t seg = 0;
            for (std::size_t t = 0; t < spec.n; ++t) {
                while (seg < segs.size() && segs[seg].start == t) {
                    level += segs[seg].level_shift;
                    slope = segs[seg].slope;
                    ++seg;
                }
                trend[t] = level;
                level += slope;
            }
            break;
        }
    }
    return trend;
}

std::pair<ObservedSeries, int> generate(const SynthSpec& spec) {
    validate_spec(spec);
    const std::size_t n = spec.n;
    std::mt19937_64 rng(spec.seed);

    const std::vector<double> trend = trend_component(spec);
    std::vector<double> y(n, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
        const double phase =
            static_cast<double>(t % static_cast<std::size_t>(spec.period)) / spec.period;
        y[t] = trend[t] + waveform_value(spec.waveform, phase);
    }
    if (spec.noise_sigma > 0) {
        std::normal_distribution<double> noise(0.0, spec.noise_sigma);
        for (std::size_t t = 0; t < n; ++t) y[t] += noise(rng);
    }

    // Outlier amplitude is tied to the std of the series before corruption.
    double mean = 0.0;
    for (double v : y) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : y) var += (v - mean) * (v - mean);
    const double clean_sd = std::sqrt(var / static_cast<double>(n));

    ObservedSeries s;
    s.values = y;
    s.mask.assign(n, 1);

    const auto missing_count = static_cast<std::size_t>(std::llround(spec.missing_ratio * n));
    if (missing_count > 0) {
        switch (spec.missing_mode) {
            case MissingMode::single_block: {
                if (missing_count + 2 > n)
                    throw std::runtime_error("synth spec: missing block longer than n-2");
                std::uniform_int_distribution<std::size_t> pos(1, n - missing_count - 1);
                const std::size_t m = pos(rng);
                for (std::size_t i = m; i < m + missing_count; ++i) s.mask[i] = 0;
                break;
            }
            case MissingMode::multi_block: {
                const auto blocks = static_cast<std::size_t>(spec.block_count);
                std::vector<std::size_t> lens(blocks, missing_count / blocks);
                for (std::size_t i = 0; i < missing_count % blocks; ++i) ++lens[i];
                for (std::size_t b = 0; b < blocks; ++b) {
                    const std::size_t l = lens[b];
                    if (l == 0) continue;
                    bool placed = false;
                    for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
                        std::uniform_int_distribution<std::size_t> pos(1, n - l - 1);
                        const std::size_t m = pos(rng);
                        bool clash = false;
                        for (std::size_t i = m; i < m + l; ++i)
                            if (!s.mask[i]) clash = true;
                        if (!clash) {
                            for (std::size_t i = m; i < m + l; ++i) s.mask[i] = 0;
                            placed = true;
                        }
                    }
                    if (!placed)
                        throw std::runtime_error("synth spec: could not place missing blocks");
                }
                break;
            }
            case MissingMode::scattered: {
                std::set<std::size_t> chosen;
                std::uniform_int_distribution<std::size_t> pos(0, n - 1);
                while (chosen.size() < missing_count) chosen.insert(pos(rng));
                for (auto i : chosen) s.mask[i] = 0;
                break;
            }
        }
    }

    const auto outlier_count = static_cast<std::size_t>(std::llround(spec.outlier_ratio * n));
    if (outlier_count > 0) {
        std::vector<std::size_t> observed;
        for (std::size_t i = 0; i < n; ++i)
            if (s.mask[i]) observed.push_back(i);
        if (observed.size() < outlier_count)
            throw std::runtime_error("synth spec: more outliers than observed points");
        // Partial Fisher-Yates for a uniform draw of distinct positions.
        for (std::size_t i = 0; i < outlier_count; ++i) {
            std::uniform_int_distribution<std::size_t> pick(i, observed.size() - 1);
            std::swap(observed[i], observed[pick(rng)]);
        }
        std::uniform_int_distribution<int> sign(0, 1);
        const double amplitude = spec.outlier_amp_sigmas * clean_sd;
        for (std::size_t i = 0; i < outlier_count; ++i)
            s.values[observed[i]] += (sign(rng) ? 1.0 : -1.0) * amplitude;
    }

    return {std::move(s), spec.period};
}

PrecisionReport run_benchmark(const std::vector<std::pair<double, double>>& grid, int trials,
                              const std::vector<std::string>& algorithms,
                              const BenchOptions& opts) {
    if (trials < 1) throw std::runtime_error("run_benchmark: trials must be >= 1");
    if (grid.empty()) throw std::runtime_error("run_benchmark: empty grid");
    if (algorithms.empty()) throw std::runtime_error("run_benchmark: no algorithms");
    for (const auto& a : algorithms) {
        if (a != "proposed" && a != "acf_med" && a != "fisher" && a != "lomb_scargle")
            throw std::runtime_error("run_benchmark: unknown algorithm '" + a + "'");
    }
    if (opts.periods.empty()) throw std::runtime_error("run_benchmark: no periods configured");

    PrecisionReport rep;
    rep.cells = grid;
    rep.algorithms = algorithms;
    rep.stats.assign(algorithms.size(), std::vector<CellStats>(grid.size()));

    const Waveform waveforms[] = {Waveform::sine, Waveform::square, Waveform::triangle};

    for (std::size_t c = 0; c < grid.size(); ++c) {
        const auto [mr, orate] = grid[c];
        // Per-trial outcome matrices, filled in parallel, reduced in order.
        std::vector<std::vector<std::uint8_t>> exact(algorithms.size(),
                                                     std::vector<std::uint8_t>(trials, 0));
        std::vector<std::vector<std::uint8_t>> close(algorithms.size(),
                                                     std::vector<std::uint8_t>(trials, 0));
        std::vector<std::vector<double>> runtime(algorithms.size(),
                                                 std::vector<double>(trials, 0.0));

#pragma omp parallel for schedule(dynamic)
        for (int trial = 0; trial < trials; ++trial) {
            SynthSpec spec = opts.base;
            spec.missing_ratio = mr;
            spec.outlier_ratio = orate;
            spec.period = opts.periods[trial % opts.periods.size()];
            if (opts.cycle_waveforms) spec.waveform = waveforms[trial % 3];
            spec.seed = mix_seed(opts.base_seed, c, static_cast<std::uint64_t>(trial));
            const auto [series, truth] = generate(spec);

            for (std::size_t a = 0; a < algorithms.size(); ++a) {
                const auto t0 = std::chrono::steady_clock::now();
                std::optional<double> est;
                bool periodic = false;
                if (algorithms[a] == "proposed") {
                    const DetectionResult r = detect_period(series, opts.detect_cfg);
                    periodic = r.periodic;
                    if (r.period) est = static_cast<double>(*r.period);
                } else if (algorithms[a] == "acf_med") {
                    const BaselineResult r = acf_med(series);
                    periodic = r.periodic;
                    est = r.period;
                } else if (algorithms[a] == "fisher") {
                    const BaselineResult r = fisher_baseline(series, opts.alpha);
                    periodic = r.periodic;
                    est = r.period;
                } else {
                    const BaselineResult r =
                        lomb_scargle(series, default_ls_grid(series.size()), opts.alpha);
                    periodic = r.periodic;
                    est = r.period;
                }
                const auto t1 = std::chrono::steady_clock::now();
                runtime[a][trial] =
                    std::chrono::duration<double, std::milli>(t1 - t0).count();
                if (periodic && est) {
                    const long rounded = std::lround(*est);
                    if (rounded == truth) exact[a][trial] = 1;
                    if (std::labs(rounded - truth) <= 1) close[a][trial] = 1;
                }
            }
        }

        for (std::size_t a = 0; a < algorithms.size(); ++a) {
            CellStats& st = rep.stats[a][c];
            st.trials = trials;
            long hits = 0, near = 0;
            double total_ms = 0.0;
            for (int trial = 0; trial < trials; ++trial) {
                hits += exact[a][trial];
                near += close[a][trial];
                total_ms += runtime[a][trial];
            }
            st.precision = static_cast<double>(hits) / trials;
            st.precision_pm1 = static_cast<double>(near) / trials;
            st.mean_runtime_ms = total_ms / trials;
        }
    }
    return rep;
}

std::string report_to_json(const PrecisionReport& rep, bool include_timings) {
    nlohmann::json j;
    j["cells"] = nlohmann::json::array();
    for (const auto& [mr, orate] : rep.cells)
        j["cells"].push_back({{"missing_ratio", mr}, {"outlier_ratio", orate}});
    j["algorithms"] = nlohmann::json::array();
    for (std::size_t a = 0; a < rep.algorithms.size(); ++a) {
        nlohmann::json entry;
        entry["name"] = rep.algorithms[a];
        entry["cells"] = nlohmann::json::array();
        for (const auto& st : rep.stats[a]) {
            nlohmann::json cell;
            cell["precision"] = st.precision;
            cell["precision_pm1"] = st.precision_pm1;
            cell["trials"] = st.trials;
            if (include_timings) cell["mean_runtime_ms"] = st.mean_runtime_ms;
            entry["cells"].push_back(cell);
        }
        j["algorithms"].push_back(entry);
    }
    return j.dump(2);
}

std::string report_to_text(const PrecisionReport& rep) {
    std::ostringstream out;
    out << "precision (exact period match)\n";
    out << "algorithm      ";
    for (const auto& [mr, orate] : rep.cells) {
        std::ostringstream head;
        head << "MR=" << mr << ",OR=" << orate;
        out << " | " << head.str();
    }
    out << '\n';
    for (std::size_t a = 0; a < rep.algorithms.size(); ++a) {
        out << rep.algorithms[a];
        for (std::size_t pad = rep.algorithms[a].size(); pad < 15; ++pad) out << ' ';
        for (const auto& st : rep.stats[a]) {
            std::ostringstream cell;
            cell.precision(3);
            cell << std::fixed << st.precision;
            out << " | " << cell.str();
            // pad to header width
        }
        out << '\n';
    }
    return out.str();
}

}  // namespace perioscope
