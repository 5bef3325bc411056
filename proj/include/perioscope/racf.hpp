#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace perioscope {

// Missing-data autocorrelation estimate. r[k] averages x_{t+k} * x_t over the
// pairs where both endpoints are observed; pair_count[k] is the number of
// such pairs. Lags with pair_count[k] == 0 are invalid; their r[k] holds 0.0
// as a placeholder and must not be interpreted.
struct RobustAcf {
    std::vector<double> r;                   // lags 0..N-1
    std::vector<std::size_t> pair_count;     // Q_k per lag
    bool normalized = false;                 // true once divided by r[0]

    bool valid(std::size_t k) const { return pair_count[k] > 0; }
};

// O(N^2) reference estimator: direct enumeration of observed pairs. The
// oracle for every fast path.
RobustAcf acf_bruteforce(const std::vector<double>& x, const std::vector<std::uint8_t>& mask);

// O(N log N) estimator: numerator and pair counts via zero-padded FFTs
// (pad to the next power of two >= 2N), denominator rounded back to exact
// integer counts. Equal to acf_bruteforce up to FFT rounding.
RobustAcf acf_fft(const std::vector<double>& x, const std::vector<std::uint8_t>& mask);

// Exact pair counts Q_k via FFT of the mask (rounded to integers).
std::vector<std::size_t> pair_counts(const std::vector<std::uint8_t>& mask);

// Direct O(N^2) pair counting; reference for pair_counts.
std::vector<std::size_t> pair_counts_direct(const std::vector<std::uint8_t>& mask);

// Pair count at lag k for a single missing block of length l starting at m
// in a series of length n, by interval arithmetic (no mask materialized).
std::size_t single_block_pair_count(std::size_t n, std::size_t m, std::size_t l, std::size_t k);

// True iff for every interior placement m (block not touching either end)
// of a single missing block of length l, every lag k in 1..n-1 keeps
// Q_k > 0. Exhaustive over (m, k). Requires 0 < l < n.
bool check_proposition(std::size_t n, std::size_t l);

// Divides r by r[0] and sets the flag. Requires a valid, nonzero r[0].
RobustAcf normalize_by_r0(RobustAcf acf);

}  // namespace perioscope
