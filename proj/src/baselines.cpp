#include "perioscope/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "perioscope/detector.hpp"
#include "perioscope/fft.hpp"
#include "perioscope/racf.hpp"

namespace perioscope {

namespace {

constexpr double kDefaultPeakHeight = 0.3;

std::vector<double> interpolated_centered(const ObservedSeries& s) {
    const ObservedSeries filled = linear_interpolate(s);
    double mean = 0.0;
    for (double v : filled.values) mean += v;
    mean /= static_cast<double>(filled.values.size());
    std::vector<double> x = filled.values;
    for (double& v : x) v -= mean;
    return x;
}

}  // namespace

BaselineResult acf_med(const ObservedSeries& s) {
    validate_series(s);
    if (s.size() < 16) throw std::runtime_error("acf_med: need at least 16 samples");
    BaselineResult res;
    res.method = "acf_med";

    const std::vector<double> x = interpolated_centered(s);
    const std::vector<std::uint8_t> full(x.size(), 1);
    RobustAcf acf = acf_fft(x, full);
    if (!acf.valid(0) || acf.r[0] == 0.0) return res;  // constant series
    acf = normalize_by_r0(std::move(acf));

    const auto peaks = find_acf_peaks(acf, kDefaultPeakHeight);
    if (peaks.empty()) return res;

    double best = 0.0;
    for (auto k : peaks) best = std::max(best, acf.r[k]);
    res.score = best;
    res.periodic = true;
    if (peaks.size() == 1) {
        res.period = static_cast<double>(peaks[0]);
    } else {
        std::vector<double> gaps;
        for (std::size_t i = 1; i < peaks.size(); ++i)
            gaps.push_back(static_cast<double>(peaks[i] - peaks[i - 1]));
        res.period = median(gaps);
    }
    return res;
}

BaselineResult fisher_baseline(const ObservedSeries& s, double alpha) {
    validate_series(s);
    if (s.size() < 16) throw std::runtime_error("fisher_baseline: need at least 16 samples");
    if (!(alpha > 0.0) || alpha >= 1.0)
        throw std::runtime_error("fisher_baseline: alpha must be in (0,1)");
    BaselineResult res;
    res.method = "fisher";

    const std::vector<double> x = interpolated_centered(s);
    const std::size_t n = x.size();
    const std::vector<double> power = fftutil::power_spectrum(x);
    const std::size_t half = n / 2;

    bool any_positive = false;
    for (std::size_t k = 1; k < half; ++k)
        if (power[k] > 0.0) any_positive = true;
    if (!any_positive) return res;  // constant series: nothing to test

    const std::vector<double> ordinates(power.begin() + 1,
                                        power.begin() + static_cast<std::ptrdiff_t>(half));
    const auto [g, arg] = fisher_g(ordinates);
    const std::size_t k_star = arg + 1;
    const double p = fisher_pvalue(g, ordinates.size());
    res.score = g;
    res.metadata = "p=" + std::to_string(p);
    if (p < alpha) {
        res.periodic = true;
        res.period = std::round(static_cast<double>(n) / static_cast<double>(k_star));
    }
    return res;
}

std::vector<double> default_ls_grid(std::size_t n) {
    if (n < 8) throw std::runtime_error("default_ls_grid: series too short");
    const double f_min = 2.0 / static_cast<double>(n);           // period N/2
    const double f_max = 0.5;                                    // period 2
    const double df = 1.0 / (4.0 * static_cast<double>(n));      // 4x oversampling
    std::vector<double> grid;
    for (double f = f_min; f <= f_max + 1e-12; f += df) grid.push_back(f);
    return grid;
}

BaselineResult lomb_scargle(const ObservedSeries& s, const std::vector<double>& freq_grid,
                            double alpha) {
    validate_series(s);
    if (freq_grid.empty()) throw std::runtime_error("lomb_scargle: empty frequency grid");
    if (!(alpha > 0.0) || alpha >= 1.0)
        throw std::runtime_error("lomb_scargle: alpha must be in (0,1)");
    BaselineResult res;
    res.method = "lomb_scargle";
    res.metadata = "sample-variance normalization; FAP = 1-(1-exp(-z))^M";

    std::vector<double> t, x;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s.mask[i]) {
            t.push_back(static_cast<double>(i));
            x.push_back(s.values[i]);
        }
    }
    const std::size_t m = x.size();
    if (m < 4) throw std::runtime_error("lomb_scargle: need at least 4 observed points");

    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(m);
    double var = 0.0;
    for (double& v : x) {
        v -= mean;
        var += v * v;
    }
    var /= static_cast<double>(m - 1);
    if (var <= 0.0) return res;  // constant observed series

    double best_power = -1.0, best_freq = 0.0;
    for (double f : freq_grid) {
        const double omega = 2.0 * M_PI * f;
        double s2 = 0.0, c2 = 0.0;
        for (double ti : t) {
            s2 += std::sin(2.0 * omega * ti);
            c2 += std::cos(2.0 * omega * ti);
        }
        const double tau = std::atan2(s2, c2) / (2.0 * omega);
        double xc = 0.0, xs = 0.0, cc = 0.0, ss = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            const double arg = omega * (t[i] - tau);
            const double cv = std::cos(arg);
            const double sv = std::sin(arg);
            xc += x[i] * cv;
            xs += x[i] * sv;
            cc += cv * cv;
            ss += sv * sv;
        }
        double p = 0.0;
        if (cc > 1e-12) p += xc * xc / cc;
        if (ss > 1e-12) p += xs * xs / ss;
        p /= 2.0 * var;
        if (p > best_power) {
            best_power = p;
            best_freq = f;
        }
    }

    res.score = best_power;
    const double f_lo = *std::min_element(freq_grid.begin(), freq_grid.end());
    const double f_hi = *std::max_element(freq_grid.begin(), freq_grid.end());
    const double m_indep = std::max(1.0, std::round((f_hi - f_lo) * static_cast<double>(s.size())));
    const double fap = 1.0 - std::pow(-std::expm1(-best_power), m_indep);
    if (fap < alpha && best_freq > 0.0) {
        res.periodic = true;
        res.period = 1.0 / best_freq;
    }
    return res;
}

std::string baseline_to_json(const BaselineResult& r) {
    nlohmann::json j;
    j["method"] = r.method;
    j["periodic"] = r.periodic;
    j["period"] = r.period ? nlohmann::json(*r.period) : nlohmann::json(nullptr);
    j["score"] = r.score;
    j["metadata"] = r.metadata;
    return j.dump(2);
}

}  // namespace perioscope
