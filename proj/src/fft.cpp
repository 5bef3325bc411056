#include "perioscope/fft.hpp"

#include <complex>
#include <mutex>
#include <stdexcept>

#include <fftw3.h>

namespace perioscope::fftutil {

namespace {

// FFTW plan creation/destruction is not thread-safe; execution of distinct
// plans is. Guard the planner, run the transforms unlocked.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

struct R2cResult {
    std::vector<std::complex<double>> half;  // bins 0..L/2
};

R2cResult run_r2c(const std::vector<double>& x) {
    const std::size_t n = x.size();
    if (n == 0) throw std::runtime_error("fft: empty input");
    std::vector<double> in(x);
    std::vector<std::complex<double>> out(n / 2 + 1);
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        plan = fftw_plan_dft_r2c_1d(static_cast<int>(n), in.data(),
                                    reinterpret_cast<fftw_complex*>(out.data()),
                                    FFTW_ESTIMATE);
    }
    if (!plan) throw std::runtime_error("fft: plan creation failed");
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(plan);
    }
    return {std::move(out)};
}

}  // namespace

std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

std::vector<double> power_spectrum(const std::vector<double>& x) {
    const std::size_t n = x.size();
    const auto half = run_r2c(x).half;
    std::vector<double> p(n);
    for (std::size_t k = 0; k < half.size(); ++k) p[k] = std::norm(half[k]);
    for (std::size_t k = half.size(); k < n; ++k) p[k] = p[n - k];
    return p;
}

std::vector<double> real_spectrum(const std::vector<double>& x) {
    const std::size_t n = x.size();
    const auto half = run_r2c(x).half;
    std::vector<double> p(n);
    for (std::size_t k = 0; k < half.size(); ++k) p[k] = half[k].real();
    for (std::size_t k = half.size(); k < n; ++k) p[k] = p[n - k];
    return p;
}

std::vector<double> inverse_of_real_even_spectrum(const std::vector<double>& S) {
    const std::size_t n = S.size();
    if (n == 0) throw std::runtime_error("fft: empty spectrum");
    std::vector<std::complex<double>> half(n / 2 + 1);
    for (std::size_t k = 0; k < half.size(); ++k) half[k] = {S[k], 0.0};
    std::vector<double> out(n);
    fftw_plan plan;
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        plan = fftw_plan_dft_c2r_1d(static_cast<int>(n),
                                    reinterpret_cast<fftw_complex*>(half.data()),
                                    out.data(), FFTW_ESTIMATE);
    }
    if (!plan) throw std::runtime_error("fft: plan creation failed");
    fftw_execute(plan);
    {
        std::lock_guard<std::mutex> lock(planner_mutex());
        fftw_destroy_plan(plan);
    }
    for (double& v : out) v /= static_cast<double>(n);
    return out;
}

}  // namespace perioscope::fftutil
