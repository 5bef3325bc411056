#include "perioscope/racf.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "perioscope/fft.hpp"

namespace perioscope {

namespace {

void check_input(const std::vector<double>& x, const std::vector<std::uint8_t>& mask) {
    if (x.size() != mask.size()) throw std::runtime_error("acf: values and mask lengths differ");
    if (x.size() < 4) throw std::runtime_error("acf: series too short");
}

}  // namespace

RobustAcf acf_bruteforce(const std::vector<double>& x, const std::vector<std::uint8_t>& mask) {
    check_input(x, mask);
    const std::size_t n = x.size();
    RobustAcf acf;
    acf.r.assign(n, 0.0);
    acf.pair_count.assign(n, 0);
    for (std::size_t k = 0; k < n; ++k) {
        double sum = 0.0;
        std::size_t count = 0;
        for (std::size_t t = 0; t + k < n; ++t) {
            if (mask[t] && mask[t + k]) {
                sum += x[t + k] * x[t];
                ++count;
            }
        }
        acf.pair_count[k] = count;
        acf.r[k] = count > 0 ? sum / static_cast<double>(count) : 0.0;
    }
    return acf;
}

RobustAcf acf_fft(const std::vector<double>& x, const std::vector<std::uint8_t>& mask) {
    check_input(x, mask);
    const std::size_t n = x.size();
    const std::size_t len = fftutil::next_pow2(2 * n);

    std::vector<double> h(len, 0.0), ind(len, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
        if (mask[t]) {
            h[t] = x[t];  // branch, never multiply: masked payloads may be NaN
            ind[t] = 1.0;
        }
    }

    const auto num = fftutil::inverse_of_real_even_spectrum(fftutil::power_spectrum(h));
    const auto den = fftutil::inverse_of_real_even_spectrum(fftutil::power_spectrum(ind));

    RobustAcf acf;
    acf.r.assign(n, 0.0);
    acf.pair_count.assign(n, 0);
    for (std::size_t k = 0; k < n; ++k) {
        const auto q = static_cast<std::size_t>(std::llround(den[k]));
        acf.pair_count[k] = q;
        acf.r[k] = q > 0 ? num[k] / static_cast<double>(q) : 0.0;
    }
    return acf;
}

std::vector<std::size_t> pair_counts(const std::vector<std::uint8_t>& mask) {
    const std::size_t n = mask.size();
    if (n == 0) throw std::runtime_error("pair_counts: empty mask");
    const std::size_t len = fftutil::next_pow2(2 * n);
    std::vector<double> ind(len, 0.0);
    for (std::size_t t = 0; t < n; ++t) ind[t] = mask[t] ? 1.0 : 0.0;
    const auto den = fftutil::inverse_of_real_even_spectrum(fftutil::power_spectrum(ind));
    std::vector<std::size_t> q(n, 0);
    for (std::size_t k = 0; k < n; ++k)
        q[k] = static_cast<std::size_t>(std::llround(den[k]));
    return q;
}

std::vector<std::size_t> pair_counts_direct(const std::vector<std::uint8_t>& mask) {
    const std::size_t n = mask.size();
    if (n == 0) throw std::runtime_error("pair_counts: empty mask");
    std::vector<std::size_t> q(n, 0);
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t count = 0;
        for (std::size_t t = 0; t + k < n; ++t)
            if (mask[t] && mask[t + k]) ++count;
        q[k] = count;
    }
    return q;
}

std::size_t single_block_pair_count(std::size_t n, std::size_t m, std::size_t l, std::size_t k) {
    // Observed index set is [0, m) ∪ [m+l, n). Pairs are t with t and t+k
    // both observed and t+k < n; three of the four interval combinations can
    // be nonempty for k >= 1.
    const auto overlap = [](std::ptrdiff_t lo1, std::ptrdiff_t hi1, std::ptrdiff_t lo2,
                            std::ptrdiff_t hi2) -> std::size_t {
        const std::ptrdiff_t lo = std::max(lo1, lo2);
        const std::ptrdiff_t hi = std::min(hi1, hi2);
        return hi > lo ? static_cast<std::size_t>(hi - lo) : 0;
    };
    const auto sn = static_cast<std::ptrdiff_t>(n);
    const auto sm = static_cast<std::ptrdiff_t>(m);
    const auto sl = static_cast<std::ptrdiff_t>(l);
    const auto sk = static_cast<std::ptrdiff_t>(k);
    if (k == 0) return n - l;
    std::size_t q = 0;
    q += overlap(0, sm, -sk, sm - sk);                 // both endpoints before the block
    q += overlap(0, sm, sm + sl - sk, sn - sk);        // t before, t+k after
    q += overlap(sm + sl, sn, sm + sl - sk, sn - sk);  // both after the block
    return q;
}

bool check_proposition(std::size_t n, std::size_t l) {
    if (l == 0 || l >= n) throw std::runtime_error("check_proposition: need 0 < l < n");
    // Interior placements only: m > 0 and m + l - 1 < n - 1.
    for (std::size_t m = 1; m + l + 1 <= n; ++m) {
        for (std::size_t k = 1; k < n; ++k)
            if (single_block_pair_count(n, m, l, k) == 0) return false;
    }
    return true;
}

RobustAcf normalize_by_r0(RobustAcf acf) {
    if (acf.normalized) return acf;
    if (acf.pair_count.empty() || acf.pair_count[0] == 0 || acf.r[0] == 0.0)
        throw std::runtime_error("normalize_by_r0: r[0] unavailable or zero");
    const double r0 = acf.r[0];
    for (double& v : acf.r) v /= r0;
    acf.normalized = true;
    return acf;
}

}  // namespace perioscope
