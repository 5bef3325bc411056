#include "perioscope/series.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace perioscope {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::string to_lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return s;
}

bool is_missing_marker(const std::string& cell) {
    if (cell.empty()) return true;
    const std::string low = to_lower(cell);
    return low == "nan" || low == "null";
}

bool parse_double(const std::string& cell, double& out) {
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    auto [ptr, ec] = std::from_chars(first, last, out);
    return ec == std::errc() && ptr == last;
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cur);
            cur.clear();
        } else {
            cur += c;
        }
    }
    cells.push_back(cur);
    return cells;
}

}  // namespace

void validate_series(const ObservedSeries& s) {
    if (s.values.size() != s.mask.size())
        throw std::runtime_error("series: values and mask lengths differ");
    if (s.values.size() < 4)
        throw std::runtime_error("series too short: need at least 4 samples, got " +
                                 std::to_string(s.values.size()));
    if (std::find(s.mask.begin(), s.mask.end(), std::uint8_t{1}) == s.mask.end())
        throw std::runtime_error("series: no observed values");
}

ObservedSeries load_csv(const std::string& path,
                        const std::optional<std::string>& column) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open file: " + path);

    std::vector<std::string> lines;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        lines.push_back(line);
    }
    // A final newline terminates the last record rather than opening an
    // empty one, so only an interior empty line counts as a missing cell.
    if (!lines.empty() && lines.back().empty()) lines.pop_back();
    if (lines.empty()) throw std::runtime_error("empty CSV file: " + path);

    std::size_t col_index = 0;
    bool col_by_name = false;
    std::string col_name;
    if (column) {
        std::size_t parsed = 0;
        const std::string c = trim(*column);
        auto [ptr, ec] = std::from_chars(c.data(), c.data() + c.size(), parsed);
        if (ec == std::errc() && ptr == c.data() + c.size()) {
            col_index = parsed;
        } else {
            col_by_name = true;
            col_name = c;
        }
    }

    std::size_t first_row = 0;
    const auto header_cells = split_csv_line(lines[0]);
    bool has_header = false;
    for (const auto& raw : header_cells) {
        const std::string cell = trim(raw);
        double unused;
        if (!cell.empty() && !is_missing_marker(cell) && !parse_double(cell, unused)) {
            has_header = true;
            break;
        }
    }
    if (col_by_name) {
        if (!has_header)
            throw std::runtime_error("column '" + col_name + "' requested but CSV has no header");
        bool found = false;
        for (std::size_t i = 0; i < header_cells.size(); ++i) {
            if (trim(header_cells[i]) == col_name) {
                col_index = i;
                found = true;
                break;
            }
        }
        if (!found) throw std::runtime_error("column '" + col_name + "' not found in header");
    }
    if (has_header) first_row = 1;

    ObservedSeries s;
    for (std::size_t r = first_row; r < lines.size(); ++r) {
        const auto cells = split_csv_line(lines[r]);
        const std::string cell = col_index < cells.size() ? trim(cells[col_index]) : std::string{};
        if (is_missing_marker(cell)) {
            s.values.push_back(0.0);
            s.mask.push_back(0);
            continue;
        }
        double v;
        if (!parse_double(cell, v))
            throw std::runtime_error("unparseable cell '" + cell + "' at row " +
                                     std::to_string(r + 1) + " of " + path);
        s.values.push_back(v);
        s.mask.push_back(1);
    }
    // Format-level checks only; the full N >= 4 invariant is enforced where
    // a series enters the analysis pipeline.
    if (s.values.size() < 2)
        throw std::runtime_error("series too short: need at least 2 rows, got " +
                                 std::to_string(s.values.size()));
    if (std::find(s.mask.begin(), s.mask.end(), std::uint8_t{1}) == s.mask.end())
        throw std::runtime_error("series: no observed values");
    return s;
}

void save_csv(const std::string& path, const ObservedSeries& s) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write file: " + path);
    std::ostringstream buf;
    buf.precision(17);
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s.mask[i]) buf << s.values[i];
        buf << '\n';
    }
    out << buf.str();
    if (!out) throw std::runtime_error("write failed: " + path);
}

std::string to_json(const ObservedSeries& s) {
    nlohmann::json j;
    j["values"] = nlohmann::json::array();
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s.mask[i])
            j["values"].push_back(s.values[i]);
        else
            j["values"].push_back(nullptr);
    }
    j["mask"] = s.mask;
    return j.dump();
}

ObservedSeries series_from_json(const std::string& text) {
    const auto j = nlohmann::json::parse(text);
    ObservedSeries s;
    const auto& vals = j.at("values");
    const auto& mask = j.at("mask");
    if (vals.size() != mask.size())
        throw std::runtime_error("series JSON: values and mask lengths differ");
    for (std::size_t i = 0; i < vals.size(); ++i) {
        const std::uint8_t m = mask[i].get<int>() ? 1 : 0;
        s.mask.push_back(m);
        if (m && !vals[i].is_null())
            s.values.push_back(vals[i].get<double>());
        else
            s.values.push_back(0.0);
    }
    if (s.values.size() < 2)
        throw std::runtime_error("series too short: need at least 2 entries, got " +
                                 std::to_string(s.values.size()));
    if (std::find(s.mask.begin(), s.mask.end(), std::uint8_t{1}) == s.mask.end())
        throw std::runtime_error("series: no observed values");
    return s;
}

MissingBlockReport scan_missing_blocks(const ObservedSeries& s) {
    validate_series(s);
    MissingBlockReport rep;
    const std::size_t n = s.size();
    std::size_t zeros = 0;
    std::size_t i = 0;
    while (i < n) {
        if (s.mask[i]) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < n && !s.mask[j]) ++j;
        rep.blocks.emplace_back(i, j - i);
        rep.max_block_len = std::max(rep.max_block_len, j - i);
        zeros += j - i;
        i = j;
    }
    rep.missing_ratio = static_cast<double>(zeros) / static_cast<double>(n);
    rep.within_safe_regime = rep.max_block_len < n / 3;
    return rep;
}

double observed_mean(const ObservedSeries& s) {
    validate_series(s);
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t i = 0; i < s.size(); ++i) {
        if (s.mask[i]) {
            sum += s.values[i];
            ++count;
        }
    }
    return sum / static_cast<double>(count);
}

ObservedSeries linear_interpolate(const ObservedSeries& s) {
    validate_series(s);
    const std::size_t n = s.size();
    std::size_t observed = 0;
    for (auto m : s.mask) observed += m;
    if (observed < 2)
        throw std::runtime_error("linear_interpolate: need at least two observed values");

    ObservedSeries out;
    out.values.assign(n, 0.0);
    out.mask.assign(n, 1);

    std::size_t prev = n;  // n = "none yet"
    for (std::size_t i = 0; i < n; ++i) {
        if (!s.mask[i]) continue;
        out.values[i] = s.values[i];
        if (prev == n) {
            for (std::size_t j = 0; j < i; ++j) out.values[j] = s.values[i];
        } else if (i > prev + 1) {
            const double lo = s.values[prev];
            const double hi = s.values[i];
            const double span = static_cast<double>(i - prev);
            for (std::size_t j = prev + 1; j < i; ++j)
                out.values[j] = lo + (hi - lo) * static_cast<double>(j - prev) / span;
        }
        prev = i;
    }
    for (std::size_t j = prev + 1; j < n; ++j) out.values[j] = s.values[prev];
    return out;
}

double median(std::vector<double> v) {
    if (v.empty()) throw std::runtime_error("median of empty vector");
    const std::size_t mid = v.size() / 2;
    std::nth_element(v.begin(), v.begin() + mid, v.end());
    double m = v[mid];
    if (v.size() % 2 == 0) {
        std::nth_element(v.begin(), v.begin() + mid - 1, v.begin() + mid);
        m = 0.5 * (m + v[mid - 1]);
    }
    return m;
}

double robust_scale(const std::vector<double>& x) {
    if (x.empty()) return 1.0;
    const double med = median(x);
    std::vector<double> dev(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) dev[i] = std::abs(x[i] - med);
    const double mad = median(dev);
    if (mad > 0.0) return 1.4826 * mad;
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(x.size()));
    return sd > 0.0 ? sd : 1.0;
}

}  // namespace perioscope
