#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>
#include <omp.h>

#include "perioscope/baselines.hpp"
#include "perioscope/detector.hpp"
#include "perioscope/series.hpp"
#include "perioscope/synthbench.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInput = 2;
constexpr int kExitConfig = 3;

// Invalid configuration (flag values violating the library invariants), as
// opposed to unreadable/malformed input.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void apply_thread_cap() {
    const char* env = std::getenv("PERIOSCOPE_THREADS");
    if (!env) return;
    int v = 0;
    const auto* end = env + std::string_view(env).size();
    const auto [ptr, ec] = std::from_chars(env, end, v);
    if (ec == std::errc() && ptr == end && v >= 1) omp_set_num_threads(v);
}

struct CommonFlags {
    double alpha = 0.05;
    double peak_height = 0.3;
    double lambda1 = 1.0;
    double lambda2 = 100.0;
    double rho = 1.0;
    int max_iter = 500;
    bool fast_mode = false;
    std::string out;
    std::string format = "json";
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--alpha", f.alpha, "Fisher test significance threshold");
    cmd->add_option("--peak-height", f.peak_height, "ACF peak height fraction of r_0");
    cmd->add_option("--lambda1", f.lambda1, "first-order difference penalty weight");
    cmd->add_option("--lambda2", f.lambda2, "second-order difference penalty weight");
    cmd->add_option("--rho", f.rho, "ADMM penalty parameter");
    cmd->add_option("--max-iter", f.max_iter, "ADMM iteration cap");
    cmd->add_flag("--fast-mode", f.fast_mode,
                  "plain |FFT|^2 numerator instead of the Huber M-periodogram");
    cmd->add_option("--out", f.out, "output file (stdout when omitted)");
    cmd->add_option("--format", f.format, "output format")
        ->check(CLI::IsMember({"json", "text"}));
}

perioscope::DetectConfig build_detect_config(const CommonFlags& f) {
    if (!(f.alpha > 0.0) || f.alpha >= 1.0) throw ConfigError("--alpha must be in (0,1)");
    if (!(f.peak_height > 0.0) || f.peak_height >= 1.0)
        throw ConfigError("--peak-height must be in (0,1)");
    if (f.lambda1 <= 0.0) throw ConfigError("--lambda1 must be positive");
    if (f.lambda2 <= 0.0) throw ConfigError("--lambda2 must be positive");
    if (f.rho <= 0.0) throw ConfigError("--rho must be positive");
    if (f.max_iter < 1) throw ConfigError("--max-iter must be >= 1");
    perioscope::DetectConfig cfg;
    cfg.alpha = f.alpha;
    cfg.peak_height_frac = f.peak_height;
    cfg.trend_cfg.lambda1 = f.lambda1;
    cfg.trend_cfg.lambda2 = f.lambda2;
    cfg.trend_cfg.rho = f.rho;
    cfg.trend_cfg.max_iter = f.max_iter;
    cfg.use_m_periodogram = !f.fast_mode;
    return cfg;
}

void emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        if (text.empty() || text.back() != '\n') std::cout << '\n';
        return;
    }
    std::ofstream out(out_path);
    if (!out) throw std::runtime_error("cannot write file: " + out_path);
    out << text;
    if (text.empty() || text.back() != '\n') out << '\n';
}

std::string detection_text(const perioscope::DetectionResult& r) {
    std::ostringstream s;
    s << "periodic: " << (r.periodic ? "yes" : "no") << '\n';
    s << "period: " << (r.period ? std::to_string(*r.period) : std::string("-")) << '\n';
    s << "g_stat: " << r.g_stat << '\n';
    s << "p_value: " << r.p_value << '\n';
    s << "k_star: " << r.k_star << '\n';
    s << "median_peak_distance: "
      << (r.median_peak_distance ? std::to_string(*r.median_peak_distance) : std::string("-"))
      << '\n';
    return s.str();
}

std::string default_config_json() {
    const perioscope::DetectConfig d;
    const perioscope::SynthSpec sp;
    nlohmann::json j;
    j["detect"] = {{"alpha", d.alpha},
                   {"peak_height_frac", d.peak_height_frac},
                   {"fast_mode", !d.use_m_periodogram}};
    j["trend"] = {{"lambda1", d.trend_cfg.lambda1},
                  {"lambda2", d.trend_cfg.lambda2},
                  {"rho", d.trend_cfg.rho},
                  {"max_iter", d.trend_cfg.max_iter},
                  {"tol_abs", d.trend_cfg.tol_abs},
                  {"tol_rel", d.trend_cfg.tol_rel}};
    j["huber"] = {{"adaptive_delta", d.huber_cfg.adaptive_delta},
                  {"delta", d.huber_cfg.delta},
                  {"irls_max_iter", d.huber_cfg.irls_max_iter},
                  {"irls_tol", d.huber_cfg.irls_tol}};
    j["synth"] = {{"length", sp.n},
                  {"period", sp.period},
                  {"noise_sigma", sp.noise_sigma},
                  {"outlier_amp_sigmas", sp.outlier_amp_sigmas},
                  {"seed", sp.seed}};
    j["bench"] = {{"trials", 200},
                  {"grid", "0:0,0:0.01,0:0.05,0.05:0,0.05:0.01,0.05:0.05,0.3:0,0.3:0.01,0.3:0.05"},
                  {"algorithms", "proposed,acf_med,fisher,lomb_scargle"}};
    return j.dump(2);
}

std::vector<std::string> split(const std::string& text, char sep) {
    std::vector<std::string> parts;
    std::string cur;
    for (char c : text) {
        if (c == sep) {
            parts.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    parts.push_back(cur);
    return parts;
}

int run_detect(const CommonFlags& flags, const std::string& input,
               const std::string& column) {
    const perioscope::DetectConfig cfg = build_detect_config(flags);
    const perioscope::ObservedSeries s =
        perioscope::load_csv(input, column.empty() ? std::nullopt : std::optional(column));
    const perioscope::DetectionResult r = perioscope::detect_period(s, cfg);
    emit(flags.format == "json" ? perioscope::detection_to_json(r) : detection_text(r),
         flags.out);
    return kExitOk;
}

int run_batch(const CommonFlags& flags, const std::vector<std::string>& inputs,
              const std::string& column) {
    const perioscope::DetectConfig cfg = build_detect_config(flags);

    std::vector<std::string> files;
    for (const auto& in : inputs) {
        if (std::filesystem::is_directory(in)) {
            std::vector<std::string> found;
            for (const auto& entry : std::filesystem::directory_iterator(in))
                if (entry.is_regular_file() && entry.path().extension() == ".csv")
                    found.push_back(entry.path().string());
            std::sort(found.begin(), found.end());
            files.insert(files.end(), found.begin(), found.end());
        } else {
            files.push_back(in);
        }
    }
    if (files.empty()) throw std::runtime_error("batch: no input files");

    struct Entry {
        std::string error;
        perioscope::DetectionResult result;
    };
    std::vector<Entry> entries(files.size());
#pragma omp parallel for schedule(dynamic)
    for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(files.size()); ++i) {
        try {
            const perioscope::ObservedSeries s = perioscope::load_csv(
                files[i], column.empty() ? std::nullopt : std::optional(column));
            entries[i].result = perioscope::detect_period(s, cfg);
        } catch (const std::exception& e) {
            entries[i].error = e.what();
        }
    }

    bool any_error = false;
    if (flags.format == "json") {
        nlohmann::json arr = nlohmann::json::array();
        for (std::size_t i = 0; i < files.size(); ++i) {
            nlohmann::json item;
            item["file"] = files[i];
            if (entries[i].error.empty())
                item["result"] =
                    nlohmann::json::parse(perioscope::detection_to_json(entries[i].result));
            else {
                item["error"] = entries[i].error;
                any_error = true;
            }
            arr.push_back(item);
        }
        emit(arr.dump(2), flags.out);
    } else {
        std::ostringstream text;
        for (std::size_t i = 0; i < files.size(); ++i) {
            text << files[i] << ": ";
            if (!entries[i].error.empty()) {
                text << "error: " << entries[i].error << '\n';
                any_error = true;
            } else if (entries[i].result.periodic) {
                text << "periodic, period " << *entries[i].result.period << '\n';
            } else {
                text << "non-periodic\n";
            }
        }
        emit(text.str(), flags.out);
    }
    return any_error ? kExitInput : kExitOk;
}

int run_synth(const CommonFlags& flags, std::size_t length, int period, double mr, double orate,
              double noise, std::uint64_t seed, const std::string& waveform,
              const std::string& trend, double slope, const std::string& changepoints,
              const std::string& missing_mode) {
    perioscope::SynthSpec spec;
    spec.n = length;
    spec.period = period;
    spec.missing_ratio = mr;
    spec.outlier_ratio = orate;
    spec.noise_sigma = noise;
    spec.seed = seed;
    if (waveform == "sine")
        spec.waveform = perioscope::Waveform::sine;
    else if (waveform == "square")
        spec.waveform = perioscope::Waveform::square;
    else if (waveform == "triangle")
        spec.waveform = perioscope::Waveform::triangle;
    else
        throw ConfigError("--waveform must be sine|square|triangle");
    if (trend == "none") {
        spec.trend = perioscope::TrendKind::none;
    } else if (trend == "linear") {
        spec.trend = perioscope::TrendKind::linear;
        spec.linear_slope = slope;
    } else if (trend == "piecewise") {
        spec.trend = perioscope::TrendKind::piecewise;
        for (const auto& part : split(changepoints, ',')) {
            if (part.empty()) continue;
            const auto fields = split(part, ':');
            if (fields.size() != 3)
                throw ConfigError("--changepoints entries must be start:slope:shift");
            perioscope::PiecewiseSegment seg;
            try {
                seg.start = std::stoul(fields[0]);
                seg.slope = std::stod(fields[1]);
                seg.level_shift = std::stod(fields[2]);
            } catch (const std::exception&) {
                throw ConfigError("--changepoints entries must be numeric start:slope:shift");
            }
            spec.segments.push_back(seg);
        }
        if (spec.segments.empty())
            throw ConfigError("--trend piecewise requires --changepoints");
    } else {
        throw ConfigError("--trend must be none|linear|piecewise");
    }
    if (missing_mode == "single_block")
        spec.missing_mode = perioscope::MissingMode::single_block;
    else if (missing_mode == "multi_block")
        spec.missing_mode = perioscope::MissingMode::multi_block;
    else if (missing_mode == "scattered")
        spec.missing_mode = perioscope::MissingMode::scattered;
    else
        throw ConfigError("--missing-mode must be single_block|multi_block|scattered");

    std::pair<perioscope::ObservedSeries, int> generated = [&] {
        try {
            return perioscope::generate(spec);
        } catch (const std::exception& e) {
            throw ConfigError(e.what());  // infeasible spec is a config problem
        }
    }();

    if (flags.out.empty()) {
        std::ostringstream csv;
        csv.precision(17);
        for (std::size_t i = 0; i < generated.first.size(); ++i) {
            if (generated.first.mask[i]) csv << generated.first.values[i];
            csv << '\n';
        }
        std::cout << csv.str();
    } else {
        perioscope::save_csv(flags.out, generated.first);
        nlohmann::json j;
        j["out"] = flags.out;
        j["period"] = generated.second;
        j["n"] = generated.first.size();
        std::cout << j.dump() << '\n';
    }
    return kExitOk;
}

int run_bench(const CommonFlags& flags, int trials, std::uint64_t seed,
              const std::string& algorithms_csv, const std::string& grid_spec,
              std::size_t length, double noise, bool timings) {
    if (trials < 1) throw ConfigError("--trials must be >= 1");
    perioscope::BenchOptions opts;
    opts.base_seed = seed;
    opts.detect_cfg = build_detect_config(flags);
    opts.alpha = flags.alpha;
    opts.base.n = length;
    opts.base.noise_sigma = noise;
    opts.base.trend = perioscope::TrendKind::piecewise;
    opts.base.segments = {{0, 0.004, 0.0},
                          {length / 2, -0.006, 0.0},
                          {5 * length / 8, 0.0, 1.5}};

    std::vector<std::string> algorithms;
    for (const auto& a : split(algorithms_csv, ','))
        if (!a.empty()) algorithms.push_back(a);
    if (algorithms.empty()) throw ConfigError("--algorithms must name at least one algorithm");

    std::vector<std::pair<double, double>> grid;
    for (const auto& cell : split(grid_spec, ',')) {
        if (cell.empty()) continue;
        const auto fields = split(cell, ':');
        if (fields.size() != 2) throw ConfigError("--grid cells must be mr:or");
        try {
            grid.emplace_back(std::stod(fields[0]), std::stod(fields[1]));
        } catch (const std::exception&) {
            throw ConfigError("--grid cells must be numeric mr:or");
        }
    }
    if (grid.empty()) throw ConfigError("--grid must name at least one cell");

    std::cerr << "bench: " << grid.size() << " cells x " << trials << " trials x "
              << algorithms.size() << " algorithms\n";
    const perioscope::PrecisionReport rep = [&] {
        try {
            return perioscope::run_benchmark(grid, trials, algorithms, opts);
        } catch (const std::exception& e) {
            throw ConfigError(e.what());
        }
    }();
    emit(flags.format == "json" ? perioscope::report_to_json(rep, timings)
                                : perioscope::report_to_text(rep),
         flags.out);
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    apply_thread_cap();

    CLI::App app{"dominant period detection for noisy, gappy time series"};
    app.require_subcommand(0, 1);
    bool show_config = false;
    app.add_flag("--show-config", show_config, "print effective defaults as JSON and exit");

    CommonFlags detect_flags;
    std::string detect_input, detect_column;
    CLI::App* detect = app.add_subcommand("detect", "detect the period of one CSV series");
    detect->add_option("input", detect_input, "CSV file")->required();
    detect->add_option("--column", detect_column, "CSV column name or index");
    add_common(detect, detect_flags);

    CommonFlags batch_flags;
    std::vector<std::string> batch_inputs;
    std::string batch_column;
    CLI::App* batch = app.add_subcommand("batch", "detect over many CSV files / a directory");
    batch->add_option("inputs", batch_inputs, "CSV files or directories")->required();
    batch->add_option("--column", batch_column, "CSV column name or index");
    add_common(batch, batch_flags);

    CommonFlags synth_flags;
    std::size_t synth_length = 480;
    int synth_period = 24;
    double synth_mr = 0.0, synth_or = 0.0, synth_noise = 0.0, synth_slope = 0.0;
    std::uint64_t synth_seed = 0;
    std::string synth_waveform = "sine", synth_trend = "none", synth_changepoints,
                synth_missing_mode = "single_block";
    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic series as CSV");
    synth->add_option("--length", synth_length, "series length");
    synth->add_option("--period", synth_period, "true period");
    synth->add_option("--mr", synth_mr, "missing ratio");
    synth->add_option("--or", synth_or, "outlier ratio");
    synth->add_option("--noise", synth_noise, "Gaussian noise sigma");
    synth->add_option("--seed", synth_seed, "RNG seed");
    synth->add_option("--waveform", synth_waveform, "sine|square|triangle");
    synth->add_option("--trend", synth_trend, "none|linear|piecewise");
    synth->add_option("--slope", synth_slope, "slope for --trend linear");
    synth->add_option("--changepoints", synth_changepoints,
                      "piecewise segments start:slope:shift[,...]");
    synth->add_option("--missing-mode", synth_missing_mode,
                      "single_block|multi_block|scattered");
    add_common(synth, synth_flags);

    CommonFlags bench_flags;
    int bench_trials = 200;
    std::uint64_t bench_seed = 1234567;
    std::size_t bench_length = 480;
    double bench_noise = 0.15;
    bool bench_timings = false;
    std::string bench_algorithms = "proposed,acf_med,fisher,lomb_scargle";
    std::string bench_grid = "0:0,0:0.01,0:0.05,0.05:0,0.05:0.01,0.05:0.05,0.3:0,0.3:0.01,0.3:0.05";
    CLI::App* bench = app.add_subcommand("bench", "run the precision benchmark sweep");
    bench->add_option("--trials", bench_trials, "trials per grid cell");
    bench->add_option("--seed", bench_seed, "base RNG seed");
    bench->add_option("--length", bench_length, "series length");
    bench->add_option("--noise", bench_noise, "Gaussian noise sigma");
    bench->add_option("--algorithms", bench_algorithms, "comma-separated algorithm list");
    bench->add_option("--grid", bench_grid, "comma-separated mr:or cells");
    bench->add_flag("--timings", bench_timings, "include mean runtimes in the report");
    add_common(bench, bench_flags);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitConfig;
    }

    if (show_config) {
        std::cout << default_config_json() << '\n';
        return kExitOk;
    }

    try {
        if (app.got_subcommand(detect)) return run_detect(detect_flags, detect_input, detect_column);
        if (app.got_subcommand(batch)) return run_batch(batch_flags, batch_inputs, batch_column);
        if (app.got_subcommand(synth))
            return run_synth(synth_flags, synth_length, synth_period, synth_mr, synth_or,
                             synth_noise, synth_seed, synth_waveform, synth_trend, synth_slope,
                             synth_changepoints, synth_missing_mode);
        if (app.got_subcommand(bench))
            return run_bench(bench_flags, bench_trials, bench_seed, bench_algorithms, bench_grid,
                             bench_length, bench_noise, bench_timings);
        std::cout << app.help();
        return kExitOk;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    }
}
