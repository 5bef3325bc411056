#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "perioscope/fft.hpp"
#include "perioscope/mspec.hpp"
#include "perioscope/racf.hpp"

using perioscope::HuberConfig;

namespace {

std::vector<double> cosine(std::size_t len, std::size_t k, double amp = 1.0, double phase = 0.0) {
    std::vector<double> x(len);
    for (std::size_t t = 0; t < len; ++t)
        x[t] = amp * std::cos(2.0 * M_PI * static_cast<double>(k * t) / static_cast<double>(len) +
                              phase);
    return x;
}

}  // namespace

TEST_CASE("huber_loss: knee continuity and formula") {
    const double d = 0.7;
    CHECK(perioscope::huber_loss(0.0, d) == 0.0);
    CHECK(perioscope::huber_loss(d, d) == doctest::Approx(d * d / 2.0));
    CHECK(perioscope::huber_loss(-d, d) == doctest::Approx(d * d / 2.0));
    CHECK(perioscope::huber_loss(2.0 * d, d) == doctest::Approx(1.5 * d * d));
    CHECK(perioscope::huber_loss(-3.0, 1.0) == doctest::Approx(2.5));
}

TEST_CASE("m_periodogram_bin: clean cosine reduces to least squares") {
    const std::size_t len = 96;
    const std::size_t k0 = 7;
    const auto h = cosine(len, k0);
    HuberConfig cfg;
    perioscope::IrlsDiag diag;
    const double p = perioscope::m_periodogram_bin(h, k0, cfg, &diag);
    CHECK(p == doctest::Approx(static_cast<double>(len) / 4.0).epsilon(1e-10));
    CHECK(diag.converged);

    const std::vector<double> zeros(len, 0.0);
    CHECK(perioscope::m_periodogram_bin(zeros, 5, cfg) == 0.0);
}

TEST_CASE("m_periodogram_bin: a huge spike barely moves the robust bin") {
    const std::size_t len = 192;
    const std::size_t k0 = 9;
    auto clean = cosine(len, k0);
    HuberConfig cfg;
    const double p_clean = perioscope::m_periodogram_bin(clean, k0, cfg);

    auto spiked = clean;
    spiked[31] += 100.0;
    const double p_robust = perioscope::m_periodogram_bin(spiked, k0, cfg);
    CHECK(std::abs(p_robust - p_clean) / p_clean < 0.05);

    // The conventional bin absorbs the spike's full leakage (measured only).
    const auto conv_clean = perioscope::fftutil::power_spectrum(clean);
    const auto conv_spiked = perioscope::fftutil::power_spectrum(spiked);
    const double conv_shift = std::abs(conv_spiked[k0] - conv_clean[k0]) / conv_clean[k0];
    CHECK(conv_shift > 0.05);  // the non-robust estimate moves much more
}

TEST_CASE("m_periodogram: clean Fourier sinusoid concentrates on one bin pair") {
    const std::size_t len = 128;
    const std::size_t k0 = 10;
    const auto h = cosine(len, k0, 2.0, 0.4);
    const auto spec = perioscope::m_periodogram(h, HuberConfig{});
    REQUIRE(spec.power.size() == len);
    CHECK(spec.n_prime == len);
    const double peak = spec.power[k0];
    CHECK(peak > 0.0);
    for (std::size_t k = 0; k < len; ++k) {
        if (k == k0 || k == len - k0) continue;
        CHECK(spec.power[k] <= 1e-8 * peak);
    }
}

TEST_CASE("m_periodogram: zeros give a zero spectrum; symmetry and nonnegativity hold") {
    const std::vector<double> zeros(64, 0.0);
    const auto spec = perioscope::m_periodogram(zeros, HuberConfig{});
    for (double v : spec.power) CHECK(v == 0.0);

    std::mt19937_64 rng(77);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> x(100);
    for (auto& v : x) v = gauss(rng);
    x[17] += 30.0;  // outlier
    x[44] -= 25.0;
    const auto s2 = perioscope::m_periodogram(x, HuberConfig{});
    for (std::size_t k = 1; k < s2.power.size(); ++k) {
        CHECK(s2.power[k] >= 0.0);
        CHECK(s2.power[k] ==
              doctest::Approx(s2.power[s2.power.size() - k]).epsilon(1e-12).scale(1.0));
    }
}

TEST_CASE("m_periodogram with effectively infinite delta matches |FFT|^2 / N'") {
    std::mt19937_64 rng(101);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> x(120);
    for (auto& v : x) v = gauss(rng);
    // Mean-remove so the DC convention (power[0] = 0) matches the DFT's.
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(x.size());
    for (auto& v : x) v -= mean;

    HuberConfig cfg;
    cfg.adaptive_delta = false;
    cfg.delta = 1e9;
    const auto spec = perioscope::m_periodogram(x, cfg);
    const auto conv = perioscope::fftutil::power_spectrum(x);
    const double n_prime = static_cast<double>(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double expected = conv[k] / n_prime;
        CHECK(spec.power[k] == doctest::Approx(expected).epsilon(1e-6).scale(1e-9));
    }
}

TEST_CASE("IRLS objective descends for every bin") {
    std::mt19937_64 rng(303);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> x(80);
    for (auto& v : x) v = gauss(rng);
    x[10] += 12.0;
    x[55] -= 20.0;

    HuberConfig cfg;
    for (std::size_t k = 1; k < 40; ++k) {
        perioscope::IrlsDiag diag;
        const double p = perioscope::m_periodogram_bin(x, k, cfg, &diag);
        CHECK(p >= 0.0);
        CHECK(diag.max_descent_violation <= 1e-12 * std::max(1.0, p));
    }
}

TEST_CASE("m_periodogram parallel and serial paths agree bitwise") {
    std::mt19937_64 rng(505);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<double> x(140);
    for (auto& v : x) v = gauss(rng);
    x[7] += 15.0;
    const auto par = perioscope::m_periodogram(x, HuberConfig{});
    const auto ser = perioscope::m_periodogram_serial(x, HuberConfig{});
    REQUIRE(par.power.size() == ser.power.size());
    for (std::size_t k = 0; k < par.power.size(); ++k) CHECK(par.power[k] == ser.power[k]);
    CHECK(par.nonconverged_bins == ser.nonconverged_bins);
}

TEST_CASE("robust_acf_m with infinite delta degenerates to acf_fft") {
    std::mt19937_64 rng(707);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        const std::size_t n = 40 + rng() % 80;
        std::vector<double> x(n);
        std::vector<std::uint8_t> mask(n, 1);
        for (std::size_t i = 0; i < n; ++i) {
            x[i] = gauss(rng);
            if (trial % 2 == 1 && unif(rng) < 0.2) mask[i] = 0;
        }
        mask[0] = 1;
        // Mean-remove over observed positions (the pipeline's precondition).
        double mean = 0.0;
        std::size_t cnt = 0;
        for (std::size_t i = 0; i < n; ++i)
            if (mask[i]) {
                mean += x[i];
                ++cnt;
            }
        mean /= static_cast<double>(cnt);
        for (std::size_t i = 0; i < n; ++i)
            if (mask[i]) x[i] -= mean;

        HuberConfig cfg;
        cfg.adaptive_delta = false;
        cfg.delta = 1e9;
        const auto robust = perioscope::normalize_by_r0(perioscope::robust_acf_m(x, mask, cfg));
        const auto classical = perioscope::normalize_by_r0(perioscope::acf_fft(x, mask));
        REQUIRE(robust.pair_count == classical.pair_count);
        for (std::size_t k = 0; k < n; ++k) {
            if (!classical.valid(k)) continue;
            CHECK(std::abs(robust.r[k] - classical.r[k]) < 1e-6);
        }
    }
}

TEST_CASE("robust_acf_m: corrupted sinusoid keeps its argmax at the true period") {
    const std::size_t n = 144;
    const int period = 12;
    std::vector<double> x(n);
    for (std::size_t t = 0; t < n; ++t)
        x[t] = std::sin(2.0 * M_PI * static_cast<double>(t) / period);

    std::vector<std::uint8_t> mask(n, 1);
    for (std::size_t i = 40; i < 40 + n / 5; ++i) mask[i] = 0;  // 20% single block

    std::mt19937_64 rng(909);
    double sd = 0.0;
    for (double v : x) sd += v * v;
    sd = std::sqrt(sd / static_cast<double>(n));
    for (int j = 0; j < 7; ++j) {  // ~5% outliers among observed samples
        std::size_t pos = rng() % n;
        while (!mask[pos]) pos = rng() % n;
        x[pos] += 5.0 * sd * (j % 2 == 0 ? 1.0 : -1.0);
    }
    double mean = 0.0;
    std::size_t cnt = 0;
    for (std::size_t i = 0; i < n; ++i)
        if (mask[i]) {
            mean += x[i];
            ++cnt;
        }
    mean /= static_cast<double>(cnt);
    for (std::size_t i = 0; i < n; ++i)
        if (mask[i]) x[i] -= mean;

    // The ACF of a periodic signal peaks at every multiple of the period, so
    // scan only the first-cycle window where lag 12 is the unique maximum.
    const auto acf = perioscope::robust_acf_m(x, mask, HuberConfig{});
    std::size_t best = 2;
    for (std::size_t k = 2; k <= 22; ++k)
        if (acf.valid(k) && acf.r[k] > acf.r[best]) best = k;
    CHECK(best == 12);
}

TEST_CASE("robust_acf_m: all-zero observed values give zero ACF at valid lags") {
    const std::size_t n = 48;
    std::vector<double> x(n, 0.0);
    std::vector<std::uint8_t> mask(n, 1);
    for (std::size_t i = 10; i < 20; ++i) mask[i] = 0;
    const auto acf = perioscope::robust_acf_m(x, mask, HuberConfig{});
    for (std::size_t k = 0; k < n; ++k)
        if (acf.valid(k)) CHECK(acf.r[k] == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("outlier probe: argmax immovable by 5% spikes across 50 seeds") {
    const std::size_t n = 288;
    const int period = 12;
    HuberConfig cfg;

    int moved = 0;
    for (std::uint64_t seed = 0; seed < 50; ++seed) {
        std::mt19937_64 rng(9000 + seed);
        std::normal_distribution<double> gauss(0.0, 0.2);
        std::vector<double> base(n);
        for (std::size_t t = 0; t < n; ++t)
            base[t] = std::sin(2.0 * M_PI * static_cast<double>(t) / period) + gauss(rng);
        double sd = 0.0, mean = 0.0;
        for (double v : base) mean += v;
        mean /= static_cast<double>(n);
        for (double v : base) sd += (v - mean) * (v - mean);
        sd = std::sqrt(sd / static_cast<double>(n));
        std::vector<double> centered = base;
        for (auto& v : centered) v -= mean;

        // Multiples of the period tie in expectation, so judge the argmax only
        // inside the first-cycle window where the true maximum is unique.
        const std::vector<std::uint8_t> mask(n, 1);
        const auto clean_acf = perioscope::robust_acf_m(centered, mask, cfg);
        auto argmax = [&](const perioscope::RobustAcf& a) {
            std::size_t best = 2;
            for (std::size_t k = 2; k <= 22; ++k)
                if (a.r[k] > a.r[best]) best = k;
            return best;
        };
        if (argmax(clean_acf) != 12) ++moved;

        auto spiked = base;
        std::uniform_int_distribution<std::size_t> pick(0, n - 1);
        for (int j = 0; j < 14; ++j)  // ~5% of 288
            spiked[pick(rng)] += 5.0 * sd * (j % 2 == 0 ? 1.0 : -1.0);
        double smean = 0.0;
        for (double v : spiked) smean += v;
        smean /= static_cast<double>(n);
        for (auto& v : spiked) v -= smean;

        const auto spiked_acf = perioscope::robust_acf_m(spiked, mask, cfg);
        if (argmax(spiked_acf) != 12) ++moved;
    }
    CHECK(moved == 0);
}
