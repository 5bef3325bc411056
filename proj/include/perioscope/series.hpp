#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace perioscope {

// Univariate series with an explicit observation mask. Missing positions keep
// an arbitrary numeric payload that must never be read; all consumers branch
// on the mask instead of multiplying by it so that NaN payloads cannot leak
// into FFT kernels.
struct ObservedSeries {
    std::vector<double> values;
    std::vector<std::uint8_t> mask;  // 1 = observed, 0 = missing

    std::size_t size() const { return values.size(); }
};

// Throws std::runtime_error if the series violates its invariants:
// equal lengths, N >= 4, at least one observed entry.
void validate_series(const ObservedSeries& s);

struct MissingBlockReport {
    // Maximal runs of mask==0 as (start index, length), sorted by start.
    std::vector<std::pair<std::size_t, std::size_t>> blocks;
    std::size_t max_block_len = 0;  // 0 when fully observed
    double missing_ratio = 0.0;
    // True when max_block_len < floor(N/3), the regime in which a single
    // missing block cannot zero out any autocorrelation pair count.
    bool within_safe_regime = true;
};

// Loads one numeric column from a CSV file. Empty cells, "NaN", "nan" and
// "null" (case-insensitive) become missing positions; any other cell must
// parse as a real number or the loader throws with the offending row number.
// `column` selects the column by 0-based index ("2") or by header name;
// when absent, column 0 is used and a non-numeric first row is treated as a
// header and skipped.
ObservedSeries load_csv(const std::string& path,
                        const std::optional<std::string>& column = std::nullopt);

// Writes one value per line, masked positions as empty lines, with enough
// digits that reloading reproduces every observed value exactly.
void save_csv(const std::string& path, const ObservedSeries& s);

// JSON text of the form {"values":[...],"mask":[...]} with masked positions
// emitted as null inside "values". serialize/deserialize round-trips observed
// values bit-exactly and the mask identically.
std::string to_json(const ObservedSeries& s);
ObservedSeries series_from_json(const std::string& text);

MissingBlockReport scan_missing_blocks(const ObservedSeries& s);

// Arithmetic mean over observed positions only.
double observed_mean(const ObservedSeries& s);

// Fills interior gaps by linear interpolation between the nearest observed
// neighbours and leading/trailing gaps by the nearest observed value.
// Requires at least two observed values. The result has an all-ones mask.
ObservedSeries linear_interpolate(const ObservedSeries& s);

// --- shared numeric utilities ---

// Median of a vector (by copy); throws on empty input.
double median(std::vector<double> v);

// Robust scale estimate: 1.4826 * median(|x - median(x)|). Falls back to the
// standard deviation when the MAD is zero, and to 1 when that is also zero,
// so callers can always divide by the result.
double robust_scale(const std::vector<double>& x);

}  // namespace perioscope
