#include "perioscope/detector.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "perioscope/fft.hpp"

namespace perioscope {

namespace {

// Invalid lags (pair count zero) filled by linear interpolation across lag
// index, trailing runs by the nearest valid value. Lag 0 is always valid for
// any series with at least one observation.
std::vector<double> fill_invalid_lags(const RobustAcf& acf) {
    const std::size_t n = acf.r.size();
    bool any_invalid = false;
    bool any_valid = false;
    for (std::size_t k = 0; k < n; ++k) {
        if (acf.valid(k))
            any_valid = true;
        else
            any_invalid = true;
    }
    if (!any_valid) throw std::runtime_error("acf: all lags invalid");
    if (!any_invalid) return acf.r;
    ObservedSeries tmp;
    tmp.values = acf.r;
    tmp.mask.resize(n);
    for (std::size_t k = 0; k < n; ++k) tmp.mask[k] = acf.valid(k) ? 1 : 0;
    return linear_interpolate(tmp).values;
}

}  // namespace

std::vector<double> wk_periodogram(const RobustAcf& acf) {
    const std::size_t n = acf.r.size();
    if (n < 4) throw std::runtime_error("wk_periodogram: need at least 4 lags");
    const std::vector<double> r = fill_invalid_lags(acf);

    const std::size_t len = 2 * n - 2;
    std::vector<double> ext(len, 0.0);
    for (std::size_t k = 0; k < n; ++k) ext[k] = r[k];
    for (std::size_t j = 1; j + 1 < n; ++j) ext[n - 1 + j] = r[n - 1 - j];

    std::vector<double> p = fftutil::real_spectrum(ext);
    for (double& v : p) v = std::max(v, 0.0);
    p[0] = 0.0;
    return p;
}

std::pair<double, std::size_t> fisher_g(const std::vector<double>& power) {
    if (power.size() < 2) throw std::runtime_error("fisher_g: need at least two bins");
    double sum = 0.0, best = -1.0;
    std::size_t best_k = 0;
    for (std::size_t k = 0; k < power.size(); ++k) {
        const double v = power[k];
        if (v < 0.0) throw std::runtime_error("fisher_g: negative power");
        sum += v;
        if (v > best) {
            best = v;
            best_k = k;
        }
    }
    if (sum <= 0.0) throw std::runtime_error("fisher_g: all-zero power");
    return {best / sum, best_k};
}

double fisher_pvalue(double g, std::size_t m) {
    if (!(g > 0.0) || g > 1.0) throw std::runtime_error("fisher_pvalue: g must be in (0,1]");
    if (m < 2) throw std::runtime_error("fisher_pvalue: need m >= 2");
    // g cannot fall below 1/m (the maximum is at least the mean), so the
    // tail probability there is exactly 1.
    if (g * static_cast<double>(m) <= 1.0) return 1.0;

    const auto md = static_cast<long double>(m);
    const std::size_t j_max = std::min<std::size_t>(m, static_cast<std::size_t>(1.0 / g));
    long double p = 0.0L;
    for (std::size_t j = 1; j <= j_max; ++j) {
        const long double one_minus = 1.0L - static_cast<long double>(j) * g;
        if (one_minus <= 0.0L) continue;
        const long double jd = static_cast<long double>(j);
        const long double log_term = std::lgamma(md + 1.0L) - std::lgamma(jd + 1.0L) -
                                     std::lgamma(md - jd + 1.0L) +
                                     (md - 1.0L) * std::log(one_minus);
        const long double term = std::exp(log_term);
        p += (j % 2 == 1) ? term : -term;
    }
    return static_cast<double>(std::clamp(p, 0.0L, 1.0L));
}

std::vector<std::size_t> find_acf_peaks(const RobustAcf& acf, double height_frac) {
    if (!(height_frac > 0.0) || height_frac >= 1.0)
        throw std::runtime_error("find_acf_peaks: height_frac must be in (0,1)");
    const std::size_t n = acf.r.size();
    if (n < 4) throw std::runtime_error("find_acf_peaks: need at least 4 lags");
    const std::vector<double> r = fill_invalid_lags(acf);

    double threshold = height_frac;
    if (!acf.normalized) {
        if (!acf.valid(0) || r[0] <= 0.0) return {};
        threshold *= r[0];
    }

    std::vector<std::size_t> peaks;
    const std::size_t limit = n / 2;
    std::size_t k = 2;
    while (k <= limit) {
        if (!acf.valid(k) || r[k] < threshold) {
            ++k;
            continue;
        }
        std::size_t j = k;
        while (j + 1 < n && r[j + 1] == r[k]) ++j;
        const bool rises = r[k] > r[k - 1];
        const bool falls = j + 1 < n && r[j + 1] < r[k];
        if (rises && falls) peaks.push_back(k);
        k = j + 1;
    }
    return peaks;
}

std::pair<double, double> rk_window(std::size_t n, std::size_t k) {
    if (k < 1) throw std::runtime_error("rk_window: k must be >= 1");
    if (n < 4 || k > n / 2) throw std::runtime_error("rk_window: k beyond periodogram range");
    const double nd = static_cast<double>(n);
    const double kd = static_cast<double>(k);
    const double low = 0.5 * (nd / (kd + 1.0) + nd / kd) - 1.0;
    const double high = k == 1 ? nd : 0.5 * (nd / kd + nd / (kd - 1.0)) + 1.0;
    return {low, high};
}

DetectionResult detect_period(const ObservedSeries& s, const DetectConfig& cfg) {
    validate_series(s);
    if (s.size() < 16) throw std::runtime_error("detect_period: need at least 16 samples");
    if (!(cfg.alpha > 0.0) || cfg.alpha >= 1.0)
        throw std::runtime_error("detect config: alpha must be in (0,1)");
    if (!(cfg.peak_height_frac > 0.0) || cfg.peak_height_frac >= 1.0)
        throw std::runtime_error("detect config: peak_height_frac must be in (0,1)");

    const std::size_t n = s.size();
    DetectionResult res;
    res.missing = scan_missing_blocks(s);

    // Stage 1: robust trend extraction, then remove trend and observed mean.
    const TrendFit fit = robust_detrend(s, cfg.trend_cfg);
    res.detrend_converged = fit.converged;
    res.detrend_iterations = fit.iterations;

    std::vector<double> x(n, 0.0);
    {
        ObservedSeries detrended;
        detrended.mask = s.mask;
        detrended.values.assign(n, 0.0);
        for (std::size_t i = 0; i < n; ++i)
            if (s.mask[i]) detrended.values[i] = s.values[i] - fit.trend[i];
        const double mu = observed_mean(detrended);
        for (std::size_t i = 0; i < n; ++i)
            if (s.mask[i]) x[i] = detrended.values[i] - mu;
    }

    // Stage 2: missing-data robust ACF.
    const RobustAcf acf =
        cfg.use_m_periodogram ? robust_acf_m(x, s.mask, cfg.huber_cfg) : acf_fft(x, s.mask);
    for (std::size_t k = 0; k < n; ++k)
        if (!acf.valid(k)) ++res.invalid_lag_count;

    // Stage 3: time-frequency decision.
    const std::vector<double> wk = wk_periodogram(acf);
    const std::size_t len = wk.size();  // 2n - 2
    const std::size_t half = len / 2;   // Nyquist index

    bool any_positive = false;
    for (std::size_t k = 1; k < half; ++k)
        if (wk[k] > 0.0) any_positive = true;
    if (!any_positive) {
        // Degenerate spectrum (e.g. constant observed series): nothing to test.
        res.periodic = false;
        res.p_value = 1.0;
        return res;
    }

    const std::vector<double> ordinates(wk.begin() + 1, wk.begin() + static_cast<std::ptrdiff_t>(half));
    const auto [g, arg] = fisher_g(ordinates);
    res.g_stat = g;
    res.k_star = arg + 1;  // ordinates start at bin 1
    res.p_value = fisher_pvalue(g, ordinates.size());

    bool acf_ok = false;
    if (acf.valid(0) && acf.r[0] != 0.0) {
        const RobustAcf norm = normalize_by_r0(acf);
        res.acf_peaks = find_acf_peaks(norm, cfg.peak_height_frac);
        if (!res.acf_peaks.empty()) {
            if (res.acf_peaks.size() == 1) {
                res.median_peak_distance = static_cast<double>(res.acf_peaks[0]);
            } else {
                std::vector<double> gaps;
                for (std::size_t i = 1; i < res.acf_peaks.size(); ++i)
                    gaps.push_back(static_cast<double>(res.acf_peaks[i] - res.acf_peaks[i - 1]));
                res.median_peak_distance = median(gaps);
            }
            acf_ok = true;
        }
    }

    res.rk_window_interval = rk_window(len, res.k_star);

    if (res.p_value < cfg.alpha) {
        const auto [lo, hi] = res.rk_window_interval;
        if (res.k_star >= 2 && acf_ok && *res.median_peak_distance >= lo &&
            *res.median_peak_distance <= hi) {
            const auto period = static_cast<int>(std::llround(*res.median_peak_distance));
            if (period >= 2) {
                res.periodic = true;
                res.period = period;
            }
        } else if (cfg.bin_period_fallback && res.k_star >= 1) {
            const auto period = static_cast<int>(
                std::llround(static_cast<double>(len) / static_cast<double>(res.k_star)));
            if (period >= 2 && period <= static_cast<int>(n)) {
                res.periodic = true;
                res.period = period;
            }
        }
    }
    return res;
}

std::string detection_to_json(const DetectionResult& r) {
    nlohmann::json j;
    j["periodic"] = r.periodic;
    j["period"] = r.period ? nlohmann::json(*r.period) : nlohmann::json(nullptr);
    j["g_stat"] = r.g_stat;
    j["p_value"] = r.p_value;
    j["k_star"] = r.k_star;
    j["acf_peaks"] = r.acf_peaks;
    j["median_peak_distance"] =
        r.median_peak_distance ? nlohmann::json(*r.median_peak_distance) : nlohmann::json(nullptr);
    j["rk_window"] = {{"low", r.rk_window_interval.first}, {"high", r.rk_window_interval.second}};
    j["diagnostics"] = {{"detrend_converged", r.detrend_converged},
                        {"detrend_iterations", r.detrend_iterations},
                        {"missing_ratio", r.missing.missing_ratio},
                        {"missing_block_count", r.missing.blocks.size()},
                        {"max_block_len", r.missing.max_block_len},
                        {"invalid_lag_count", r.invalid_lag_count}};
    return j.dump(2);
}

}  // namespace perioscope
