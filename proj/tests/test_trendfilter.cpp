#include <doctest.h>

#include <stdexcept>

#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "perioscope/series.hpp"
#include "perioscope/trendfilter.hpp"

using perioscope::ObservedSeries;
using perioscope::TrendConfig;

namespace {

ObservedSeries full_series(std::vector<double> v) {
    ObservedSeries s;
    s.mask.assign(v.size(), 1);
    s.values = std::move(v);
    return s;
}

// The stacked residual ||A tau - b||_1 with A = [W; l1 D1; l2 D2],
// b = [W y; 0; 0], assembled from the public pieces.
double stacked_l1(const ObservedSeries& s, const std::vector<double>& tau, double l1, double l2) {
    const std::size_t n = s.size();
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        if (s.mask[i]) total += std::abs(tau[i] - s.values[i]);
    const auto d1 = perioscope::difference_matrix(1, n).apply(tau);
    for (double v : d1) total += l1 * std::abs(v);
    const auto d2 = perioscope::difference_matrix(2, n).apply(tau);
    for (double v : d2) total += l2 * std::abs(v);
    return total;
}

}  // namespace

TEST_CASE("difference_matrix: shapes, stencils, worked examples") {
    const auto d1 = perioscope::difference_matrix(1, 4);
    CHECK(d1.rows == 3);
    CHECK(d1.cols == 4);
    CHECK(d1.apply({0, 1, 2, 3}) == std::vector<double>{-1, -1, -1});

    const auto d2 = perioscope::difference_matrix(2, 4);
    CHECK(d2.rows == 2);
    CHECK(d2.apply({0, 1, 2, 3}) == std::vector<double>{0, 0});

    const auto d2b = perioscope::difference_matrix(2, 5);
    CHECK(d2b.apply({0, 0, 1, 2, 3}) == std::vector<double>{1, 0, 0});

    CHECK_THROWS_AS(perioscope::difference_matrix(3, 10), std::runtime_error);
    CHECK_THROWS_AS(perioscope::difference_matrix(2, 2), std::runtime_error);
    CHECK_THROWS_AS(perioscope::difference_matrix(1, 4).apply({1, 2, 3}), std::runtime_error);
}

TEST_CASE("soft_threshold: scalar and vector forms") {
    CHECK(perioscope::soft_threshold(2.0, 0.5) == doctest::Approx(1.5));
    CHECK(perioscope::soft_threshold(0.3, 0.5) == 0.0);
    CHECK(perioscope::soft_threshold(-2.0, 0.5) == doctest::Approx(-1.5));
    CHECK(perioscope::soft_threshold(0.0, 0.5) == 0.0);
    CHECK(perioscope::soft_threshold(0.5, 0.5) == 0.0);  // boundary maps to 0

    const auto v = perioscope::soft_threshold(std::vector<double>{2.0, 0.3, -2.0}, 0.5);
    CHECK(v[0] == doctest::Approx(1.5));
    CHECK(v[1] == 0.0);
    CHECK(v[2] == doctest::Approx(-1.5));
}

TEST_CASE("stacking equality: ||A tau - b||_1 equals the objective, 100 random triples") {
    std::mt19937_64 rng(17);
    std::normal_distribution<double> gauss(0.0, 2.0);
    std::uniform_real_distribution<double> lam(0.05, 20.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 4 + rng() % 60;
        ObservedSeries s;
        s.values.resize(n);
        s.mask.resize(n);
        bool any = false;
        for (std::size_t i = 0; i < n; ++i) {
            s.values[i] = gauss(rng);
            s.mask[i] = unif(rng) < 0.8 ? 1 : 0;
            any = any || s.mask[i];
        }
        if (!any) s.mask[0] = 1;
        std::vector<double> tau(n);
        for (auto& t : tau) t = gauss(rng);
        const double l1 = lam(rng), l2 = lam(rng);
        const double direct = perioscope::trend_objective(s, tau, l1, l2);
        const double stacked = stacked_l1(s, tau, l1, l2);
        CHECK(std::abs(direct - stacked) <= 1e-10 * std::max(1.0, std::abs(direct)));
    }
}

TEST_CASE("robust_detrend reproduces an exact affine ramp to 1e-6") {
    const std::size_t n = 200;
    ObservedSeries s;
    s.mask.assign(n, 1);
    s.values.resize(n);
    for (std::size_t t = 0; t < n; ++t) s.values[t] = 0.3 + 0.005 * static_cast<double>(t);

    const auto fit = perioscope::robust_detrend(s, TrendConfig{});
    CHECK(fit.converged);
    CHECK(fit.iterations <= 500);
    double max_dev = 0.0;
    for (std::size_t t = 0; t < n; ++t)
        max_dev = std::max(max_dev, std::abs(fit.trend[t] - s.values[t]));
    CHECK(max_dev < 1e-6);
}

TEST_CASE("robust_detrend ignores a single large spike") {
    const std::size_t n = 240;
    std::vector<double> clean(n);
    for (std::size_t t = 0; t < n; ++t) {
        const double td = static_cast<double>(t);
        clean[t] = t < n / 2 ? 0.01 * td : 0.01 * static_cast<double>(n / 2) -
                                               0.008 * (td - static_cast<double>(n / 2));
    }
    double mean = 0.0;
    for (double v : clean) mean += v;
    mean /= static_cast<double>(n);
    double sd = 0.0;
    for (double v : clean) sd += (v - mean) * (v - mean);
    sd = std::sqrt(sd / static_cast<double>(n));

    ObservedSeries s = full_series(clean);
    const double spike = 10.0 * sd;
    s.values[n / 2] += spike;

    const auto fit = perioscope::robust_detrend(s, TrendConfig{});
    CHECK(std::abs(fit.trend[n / 2] - clean[n / 2]) < spike / 10.0);
}

TEST_CASE("robust_detrend bridges a missing block over a linear segment") {
    const std::size_t n = 160;
    ObservedSeries s;
    s.values.resize(n);
    s.mask.assign(n, 1);
    for (std::size_t t = 0; t < n; ++t) s.values[t] = 0.2 + 0.01 * static_cast<double>(t);
    for (std::size_t t = 60; t < 60 + n / 4; ++t) s.mask[t] = 0;  // length-40 interior block

    const auto fit = perioscope::robust_detrend(s, TrendConfig{});
    CHECK(fit.converged);
    for (std::size_t t = 0; t < n; ++t)
        CHECK(std::abs(fit.trend[t] - (0.2 + 0.01 * static_cast<double>(t))) < 1e-3);
}

TEST_CASE("objective at the solution does not exceed cheap reference candidates") {
    std::mt19937_64 rng(23);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n = 60 + rng() % 80;
        ObservedSeries s;
        s.values.resize(n);
        s.mask.resize(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double t = static_cast<double>(i);
            s.values[i] = 0.02 * t + std::sin(2.0 * M_PI * t / 16.0) + 0.2 * gauss(rng);
            s.mask[i] = unif(rng) < 0.85 ? 1 : 0;
        }
        s.mask[0] = s.mask[n - 1] = 1;

        TrendConfig cfg;
        const auto fit = perioscope::robust_detrend(s, cfg);
        const double at_fit = perioscope::trend_objective(s, fit.trend, cfg.lambda1, cfg.lambda2);
        const double at_interp = perioscope::trend_objective(
            s, perioscope::linear_interpolate(s).values, cfg.lambda1, cfg.lambda2);
        const double at_zero =
            perioscope::trend_objective(s, std::vector<double>(n, 0.0), cfg.lambda1, cfg.lambda2);
        CHECK(at_fit <= at_interp * (1.0 + 1e-9) + 1e-9);
        CHECK(at_fit <= at_zero * (1.0 + 1e-9) + 1e-9);
    }
}

TEST_CASE("masked payload values cannot influence the trend") {
    std::mt19937_64 rng(29);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const std::size_t n = 120;
    ObservedSeries a;
    a.values.resize(n);
    a.mask.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        a.values[i] = 0.01 * static_cast<double>(i) + 0.3 * gauss(rng);
        a.mask[i] = (i % 7 == 3 || (i > 50 && i < 70)) ? 0 : 1;
    }
    ObservedSeries b = a;
    for (std::size_t i = 0; i < n; ++i)
        if (!b.mask[i]) b.values[i] = 1e6 + static_cast<double>(i);

    const auto fit_a = perioscope::robust_detrend(a, TrendConfig{});
    const auto fit_b = perioscope::robust_detrend(b, TrendConfig{});
    double max_diff = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        max_diff = std::max(max_diff, std::abs(fit_a.trend[i] - fit_b.trend[i]));
    CHECK(max_diff < 1e-8);
}

TEST_CASE("converged fits satisfy the reported-residual stopping inequality") {
    // Recompute the primal tolerance from the returned trend, using the same
    // robust standardization the solver applies internally.
    const std::size_t n = 150;
    ObservedSeries s;
    s.values.resize(n);
    s.mask.assign(n, 1);
    for (std::size_t t = 0; t < n; ++t) s.values[t] = 1.0 + 0.02 * static_cast<double>(t);
    for (std::size_t t = 40; t < 70; ++t) s.mask[t] = 0;

    TrendConfig cfg;
    const auto fit = perioscope::robust_detrend(s, cfg);
    REQUIRE(fit.converged);

    std::vector<double> obs;
    for (std::size_t i = 0; i < n; ++i)
        if (s.mask[i]) obs.push_back(s.values[i]);
    const double center = perioscope::median(obs);
    const double scale = perioscope::robust_scale(obs);

    std::vector<double> xhat(n);
    for (std::size_t i = 0; i < n; ++i) xhat[i] = (fit.trend[i] - center) / scale;

    const std::size_t rows = 3 * n - 3;
    std::vector<double> ax(rows, 0.0);
    for (std::size_t i = 0; i < n; ++i) ax[i] = s.mask[i] ? xhat[i] : 0.0;
    const auto d1 = perioscope::difference_matrix(1, n).apply(xhat);
    for (std::size_t t = 0; t < d1.size(); ++t) ax[n + t] = cfg.lambda1 * d1[t];
    const auto d2 = perioscope::difference_matrix(2, n).apply(xhat);
    for (std::size_t t = 0; t < d2.size(); ++t) ax[2 * n - 1 + t] = cfg.lambda2 * d2[t];

    double norm_ax = 0.0;
    for (double v : ax) norm_ax += v * v;
    norm_ax = std::sqrt(norm_ax);

    const double eps_pri =
        std::sqrt(static_cast<double>(rows)) * cfg.tol_abs + cfg.tol_rel * norm_ax;
    CHECK(fit.primal_residual <= eps_pri * 1.01 + 1e-12);
}

TEST_CASE("kink fixture: trend quality holds even without a convergence certificate") {
    std::mt19937_64 rng(41);
    std::normal_distribution<double> gauss(0.0, 0.05);
    const std::size_t n = 300;
    std::vector<double> clean(n);
    for (std::size_t t = 0; t < n; ++t) {
        const double td = static_cast<double>(t);
        clean[t] = t < 150 ? 0.01 * td : 1.5 - 0.006 * (td - 150.0);
    }
    ObservedSeries s;
    s.mask.assign(n, 1);
    s.values.resize(n);
    for (std::size_t t = 0; t < n; ++t) s.values[t] = clean[t] + gauss(rng);

    const auto fit = perioscope::robust_detrend(s, TrendConfig{});
    REQUIRE(fit.trend.size() == n);
    double rmse = 0.0;
    for (std::size_t t = 0; t < n; ++t) {
        const double d = fit.trend[t] - clean[t];
        rmse += d * d;
    }
    rmse = std::sqrt(rmse / static_cast<double>(n));
    CHECK(rmse < 0.1);
}

TEST_CASE("scale equivariance of the full solve") {
    const std::size_t n = 96;
    ObservedSeries s;
    s.mask.assign(n, 1);
    s.values.resize(n);
    std::mt19937_64 rng(43);
    std::normal_distribution<double> gauss(0.0, 0.3);
    for (std::size_t t = 0; t < n; ++t)
        s.values[t] = 0.05 * static_cast<double>(t) + gauss(rng);

    const auto base = perioscope::robust_detrend(s, TrendConfig{});
    for (double c : {1e-4, 250.0}) {
        ObservedSeries scaled = s;
        for (auto& v : scaled.values) v *= c;
        const auto fit = perioscope::robust_detrend(scaled, TrendConfig{});
        CHECK(fit.iterations == base.iterations);
        for (std::size_t t = 0; t < n; ++t)
            CHECK(fit.trend[t] == doctest::Approx(c * base.trend[t]).epsilon(1e-9));
    }
}

TEST_CASE("config validation") {
    ObservedSeries s = full_series({1, 2, 3, 4, 5, 6});
    TrendConfig bad;
    bad.lambda1 = 0.0;
    CHECK_THROWS_AS(perioscope::robust_detrend(s, bad), std::runtime_error);
    bad = TrendConfig{};
    bad.rho = -1.0;
    CHECK_THROWS_AS(perioscope::robust_detrend(s, bad), std::runtime_error);
    bad = TrendConfig{};
    bad.max_iter = 0;
    CHECK_THROWS_AS(perioscope::robust_detrend(s, bad), std::runtime_error);
}
