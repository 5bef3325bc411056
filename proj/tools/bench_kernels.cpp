// Timing harness comparing the OpenMP kernels against their serial reference
// implementations, and checking that both produce the same numbers.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <random>
#include <vector>

#include <omp.h>

#include "perioscope/mspec.hpp"
#include "perioscope/racf.hpp"
#include "perioscope/series.hpp"

namespace {

using Clock = std::chrono::steady_clock;

double ms_since(Clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

perioscope::ObservedSeries make_series(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, 0.3);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    perioscope::ObservedSeries s;
    s.values.resize(n);
    s.mask.assign(n, 1);
    for (std::size_t t = 0; t < n; ++t) {
        s.values[t] = std::sin(2.0 * M_PI * static_cast<double>(t) / 24.0) + noise(rng);
        if (unif(rng) < 0.15) {
            s.mask[t] = 0;
            s.values[t] = std::numeric_limits<double>::quiet_NaN();
        }
    }
    s.mask[0] = 1;
    s.values[0] = 0.1;  // keep at least one observation
    return s;
}

int failures = 0;

void check(bool ok, const char* what) {
    if (!ok) {
        ++failures;
        std::printf("  MISMATCH: %s\n", what);
    }
}

void bench_m_periodogram(std::size_t n) {
    const perioscope::ObservedSeries s = make_series(n, 42 + n);
    const double mean = perioscope::observed_mean(s);
    std::vector<double> h(2 * n, 0.0);
    for (std::size_t t = 0; t < n; ++t)
        if (s.mask[t]) h[t] = s.values[t] - mean;

    perioscope::HuberConfig cfg;

    auto t0 = Clock::now();
    const perioscope::MPeriodogram serial = perioscope::m_periodogram_serial(h, cfg);
    const double t_serial = ms_since(t0);

    t0 = Clock::now();
    const perioscope::MPeriodogram parallel = perioscope::m_periodogram(h, cfg);
    const double t_parallel = ms_since(t0);

    double max_dev = 0.0;
    for (std::size_t k = 0; k < serial.power.size(); ++k)
        max_dev = std::max(max_dev, std::abs(serial.power[k] - parallel.power[k]));
    check(max_dev == 0.0, "m_periodogram parallel != serial");

    std::printf("m_periodogram    N=%6zu  serial %9.2f ms  parallel %9.2f ms  speedup %5.2fx  max|dev| %.3g\n",
                n, t_serial, t_parallel, t_serial / std::max(t_parallel, 1e-9), max_dev);
}

void bench_acf(std::size_t n) {
    const perioscope::ObservedSeries s = make_series(n, 7 + n);

    auto t0 = Clock::now();
    const perioscope::RobustAcf brute = perioscope::acf_bruteforce(s.values, s.mask);
    const double t_brute = ms_since(t0);

    t0 = Clock::now();
    const perioscope::RobustAcf fft = perioscope::acf_fft(s.values, s.mask);
    const double t_fft = ms_since(t0);

    double max_dev = 0.0;
    bool counts_ok = true;
    for (std::size_t k = 0; k < n; ++k) {
        max_dev = std::max(max_dev, std::abs(brute.r[k] - fft.r[k]));
        counts_ok = counts_ok && brute.pair_count[k] == fft.pair_count[k];
    }
    check(max_dev < 1e-9, "acf_fft deviates from acf_bruteforce");
    check(counts_ok, "acf_fft pair counts differ from brute force");

    std::printf("acf              N=%6zu  brute  %9.2f ms  fft      %9.2f ms  speedup %5.2fx  max|dev| %.3g\n",
                n, t_brute, t_fft, t_brute / std::max(t_fft, 1e-9), max_dev);
}

void bench_pair_counts(std::size_t n) {
    const perioscope::ObservedSeries s = make_series(n, 99 + n);

    auto t0 = Clock::now();
    const std::vector<std::size_t> direct = perioscope::pair_counts_direct(s.mask);
    const double t_direct = ms_since(t0);

    t0 = Clock::now();
    const std::vector<std::size_t> fft = perioscope::pair_counts(s.mask);
    const double t_fft = ms_since(t0);

    check(direct == fft, "pair_counts (FFT) != pair_counts_direct");

    std::printf("pair_counts      N=%6zu  direct %9.2f ms  fft      %9.2f ms  speedup %5.2fx\n",
                n, t_direct, t_fft, t_direct / std::max(t_fft, 1e-9));
}

}  // namespace

int main() {
    std::printf("threads: %d\n", omp_get_max_threads());
    for (std::size_t n : {256u, 512u, 1024u}) bench_m_periodogram(n);
    for (std::size_t n : {512u, 2048u, 8192u}) bench_acf(n);
    for (std::size_t n : {2048u, 8192u, 32768u}) bench_pair_counts(n);
    if (failures) {
        std::printf("%d kernel mismatches\n", failures);
        return 1;
    }
    std::printf("all kernel pairs agree\n");
    return 0;
}
