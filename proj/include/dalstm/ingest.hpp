#pragma once

#include "dalstm/error.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <map>
#include <cstdio>
#include <ostream>
#include <random>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

namespace dalstm {

inline constexpr std::int64_t kSecondsPerDay = 86400;

// ---------------------------------------------------------------------------
// Timestamps
// ---------------------------------------------------------------------------

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '"')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r' || s.back() == '"'))
        s.remove_suffix(1);
    return s;
}

inline bool read_int(std::string_view s, std::size_t pos, std::size_t len, int& out) {
    if (pos + len > s.size()) return false;
    auto first = s.data() + pos;
    auto [ptr, ec] = std::from_chars(first, first + len, out);
    return ec == std::errc() && ptr == first + len;
}

inline std::int64_t floor_div(std::int64_t a, std::int64_t b) {
    std::int64_t q = a / b;
    if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
    return q;
}

} // namespace detail

/// Parses `YYYY-MM-DD[T ]HH:MM[:SS[.fff]][Z|+HH:MM|-HH:MM|+HHMM]` into UTC epoch seconds.
/// A timestamp without zone designator is taken as UTC. Returns false on malformed input.
inline bool parse_iso8601(std::string_view text, std::int64_t& epoch_seconds) {
    using namespace std::chrono;
    text = detail::trim(text);
    int y = 0, mo = 0, d = 0, h = 0, mi = 0, s = 0;
    if (text.size() < 16 || text[4] != '-' || text[7] != '-' || (text[10] != 'T' && text[10] != ' ') ||
        text[13] != ':')
        return false;
    if (!detail::read_int(text, 0, 4, y) || !detail::read_int(text, 5, 2, mo) || !detail::read_int(text, 8, 2, d) ||
        !detail::read_int(text, 11, 2, h) || !detail::read_int(text, 14, 2, mi))
        return false;
    std::size_t pos = 16;
    if (pos < text.size() && text[pos] == ':') {
        if (!detail::read_int(text, pos + 1, 2, s)) return false;
        pos += 3;
        if (pos < text.size() && text[pos] == '.') {
            ++pos;
            while (pos < text.size() && text[pos] >= '0' && text[pos] <= '9') ++pos;
        }
    }
    int offset_minutes = 0;
    if (pos < text.size()) {
        char c = text[pos];
        if (c == 'Z' || c == 'z') {
            ++pos;
        } else if (c == '+' || c == '-') {
            int oh = 0, om = 0;
            if (!detail::read_int(text, pos + 1, 2, oh)) return false;
            std::size_t next = pos + 3;
            if (next < text.size() && text[next] == ':') ++next;
            if (next < text.size()) {
                if (!detail::read_int(text, next, 2, om)) return false;
                next += 2;
            }
            offset_minutes = (c == '+' ? 1 : -1) * (oh * 60 + om);
            pos = next;
        } else {
            return false;
        }
    }
    if (pos != text.size()) return false;
    if (h > 23 || mi > 59 || s > 60) return false;
    year_month_day ymd{year{y}, month{static_cast<unsigned>(mo)}, day{static_cast<unsigned>(d)}};
    if (!ymd.ok()) return false;
    const std::int64_t days = sys_days{ymd}.time_since_epoch().count();
    epoch_seconds = days * kSecondsPerDay + h * 3600 + mi * 60 + s - offset_minutes * 60;
    return true;
}

/// Formats UTC epoch seconds as `YYYY-MM-DDTHH:MM:SSZ`.
inline std::string format_iso8601(std::int64_t epoch_seconds) {
    using namespace std::chrono;
    const std::int64_t days = detail::floor_div(epoch_seconds, kSecondsPerDay);
    const std::int64_t rem = epoch_seconds - days * kSecondsPerDay;
    const year_month_day ymd{sys_days{std::chrono::days{days}}};
    char buf[32];
    std::snprintf(buf, sizeof buf, "%04d-%02u-%02uT%02d:%02d:%02dZ", static_cast<int>(ymd.year()),
                  static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()), static_cast<int>(rem / 3600),
                  static_cast<int>((rem % 3600) / 60), static_cast<int>(rem % 60));
    return buf;
}

inline std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

// ---------------------------------------------------------------------------
// Series types
// ---------------------------------------------------------------------------

/// Univariate consumption stream. `timestamps` are UTC epoch seconds, strictly increasing;
/// a series is regular (gapless) when every step equals `resolution_s`.
struct LoadSeries {
    std::int64_t start_time = 0;
    std::int64_t resolution_s = 600;
    std::vector<std::int64_t> timestamps;
    std::vector<double> values;

    std::size_t size() const noexcept { return values.size(); }

    bool is_regular() const noexcept {
        for (std::size_t i = 1; i < timestamps.size(); ++i)
            if (timestamps[i] - timestamps[i - 1] != resolution_s) return false;
        return true;
    }

    std::size_t readings_per_day() const noexcept {
        return resolution_s > 0 ? static_cast<std::size_t>(kSecondsPerDay / resolution_s) : 0;
    }
};

/// One day's readings; `day_index` counts local days since 1970-01-01.
struct DaySample {
    std::int64_t day_index = 0;
    std::vector<double> readings;
};

struct CsvSchema {
    std::string timestamp_column = "timestamp";
    std::string value_column = "consumption_kwh";
};

struct SplitSpec {
    double train_fraction = 0.75;
    double validation_fraction_of_train = 1.0 / 6.0;
};

struct DatasetSplit {
    std::vector<DaySample> train;
    std::vector<DaySample> validation;
    std::vector<DaySample> test;
};

struct SegmentationReport {
    std::size_t leading_dropped = 0;   // readings before the first complete day
    std::size_t trailing_dropped = 0;  // readings after the last complete day
    std::size_t anomalous_days = 0;    // interior days with the wrong slot count
    std::size_t complete_days = 0;
};

struct Segmentation {
    std::vector<DaySample> days;
    SegmentationReport report;
};

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

namespace detail {

inline std::vector<std::string_view> split_csv_line(std::string_view line) {
    std::vector<std::string_view> cells;
    std::size_t start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
        if (i == line.size() || line[i] == ',') {
            cells.push_back(trim(line.substr(start, i - start)));
            start = i + 1;
        }
    }
    return cells;
}

inline std::int64_t modal_gap(const std::vector<std::int64_t>& ts) {
    std::map<std::int64_t, std::size_t> counts;
    for (std::size_t i = 1; i < ts.size(); ++i) ++counts[ts[i] - ts[i - 1]];
    std::int64_t best = 0;
    std::size_t best_count = 0;
    for (auto [gap, count] : counts)
        if (count > best_count) best = gap, best_count = count;
    return best;
}

} // namespace detail

/// Reads a headered CSV stream. `default_resolution_s` applies only to a single-row series.
inline LoadSeries parse_load_csv(std::istream& in, const CsvSchema& schema = {},
                                 std::int64_t default_resolution_s = 600) {
    std::string line;
    std::size_t line_no = 0;
    std::size_t ts_col = 0, val_col = 0;
    bool have_header = false;
    std::vector<std::pair<std::int64_t, double>> rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        auto cells = detail::split_csv_line(line);
        if (!have_header) {
            auto find = [&](const std::string& name) {
                auto it = std::find(cells.begin(), cells.end(), name);
                if (it == cells.end())
                    throw Error(ErrorCode::UnparseableRow, "line " + std::to_string(line_no) + ": header lacks column '" +
                                                               name + "'");
                return static_cast<std::size_t>(it - cells.begin());
            };
            ts_col = find(schema.timestamp_column);
            val_col = find(schema.value_column);
            have_header = true;
            continue;
        }
        std::int64_t t = 0;
        double v = 0.0;
        if (cells.size() <= std::max(ts_col, val_col) || !parse_iso8601(cells[ts_col], t))
            throw Error(ErrorCode::UnparseableRow, "line " + std::to_string(line_no));
        auto cell = cells[val_col];
        auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
        if (ec != std::errc() || ptr != cell.data() + cell.size() || !std::isfinite(v))
            throw Error(ErrorCode::UnparseableRow, "line " + std::to_string(line_no));
        if (v < 0.0)
            throw Error(ErrorCode::NegativeReading, "line " + std::to_string(line_no) + ": " + std::string(cell));
        rows.emplace_back(t, v);
    }
    if (rows.empty()) throw Error(ErrorCode::EmptySeries, "no data rows");
    std::stable_sort(rows.begin(), rows.end(), [](auto& a, auto& b) { return a.first < b.first; });

    LoadSeries series;
    series.timestamps.reserve(rows.size());
    series.values.reserve(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (i > 0 && rows[i].first == rows[i - 1].first)
            throw Error(ErrorCode::NonMonotoneTimestamps, "repeated timestamp " + format_iso8601(rows[i].first));
        series.timestamps.push_back(rows[i].first);
        series.values.push_back(rows[i].second);
    }
    series.start_time = series.timestamps.front();
    series.resolution_s = series.size() > 1 ? detail::modal_gap(series.timestamps) : default_resolution_s;
    return series;
}

inline LoadSeries parse_load_csv(const std::string& path, const CsvSchema& schema = {}) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
    return parse_load_csv(in, schema);
}

inline void write_load_csv(std::ostream& out, const LoadSeries& series, const CsvSchema& schema = {}) {
    out << schema.timestamp_column << ',' << schema.value_column << '\n';
    for (std::size_t i = 0; i < series.size(); ++i)
        out << format_iso8601(series.timestamps[i]) << ',' << format_double(series.values[i]) << '\n';
}

inline void write_load_csv(const std::string& path, const LoadSeries& series, const CsvSchema& schema = {}) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
    write_load_csv(out, series, schema);
}

// ---------------------------------------------------------------------------
// Regularization and segmentation
// ---------------------------------------------------------------------------

/// Fills interior runs of at most `max_gap` missing slots by linear interpolation.
inline LoadSeries resample_and_fill(const LoadSeries& series, std::size_t max_gap) {
    if (series.values.empty()) throw Error(ErrorCode::EmptySeries, "nothing to resample");
    if (series.resolution_s <= 0) throw Error(ErrorCode::InvalidResolution, "resolution must be positive");
    const auto res = series.resolution_s;
    LoadSeries out;
    out.start_time = series.timestamps.front();
    out.resolution_s = res;
    out.timestamps.push_back(series.timestamps.front());
    out.values.push_back(series.values.front());
    for (std::size_t i = 1; i < series.size(); ++i) {
        const auto t0 = series.timestamps[i - 1], t1 = series.timestamps[i];
        const auto step = t1 - t0;
        if (step <= 0) throw Error(ErrorCode::NonMonotoneTimestamps, "at " + format_iso8601(t1));
        if (step % res != 0)
            throw Error(ErrorCode::InvalidResolution,
                        "reading at " + format_iso8601(t1) + " is off the " + std::to_string(res) + " s grid");
        const auto missing = static_cast<std::size_t>(step / res - 1);
        if (missing > max_gap)
            throw Error(ErrorCode::GapTooLarge, std::to_string(missing) + " missing slots between " +
                                                    format_iso8601(t0) + " and " + format_iso8601(t1));
        const double v0 = series.values[i - 1], v1 = series.values[i];
        for (std::size_t k = 1; k <= missing; ++k) {
            const double w = static_cast<double>(k) / static_cast<double>(missing + 1);
            out.timestamps.push_back(t0 + static_cast<std::int64_t>(k) * res);
            out.values.push_back(v0 + w * (v1 - v0));
        }
        out.timestamps.push_back(t1);
        out.values.push_back(v1);
    }
    return out;
}

/// Splits a gapless series into complete local calendar days. Midnight is taken in the
/// fixed offset `utc_offset_minutes`.
inline Segmentation segment_days(const LoadSeries& series, int utc_offset_minutes = 0) {
    if (series.values.empty()) throw Error(ErrorCode::EmptySeries, "nothing to segment");
    if (series.resolution_s <= 0 || kSecondsPerDay % series.resolution_s != 0)
        throw Error(ErrorCode::InvalidResolution, "resolution must divide a day");
    if (!series.is_regular()) throw Error(ErrorCode::GapTooLarge, "series has gaps; resample it first");

    const std::size_t per_day = series.readings_per_day();
    const std::int64_t offset = static_cast<std::int64_t>(utc_offset_minutes) * 60;
    struct Group {
        std::int64_t day;
        std::size_t begin, end;
        bool complete;
    };
    std::vector<Group> groups;
    for (std::size_t i = 0; i < series.size();) {
        const auto local = series.timestamps[i] + offset;
        const auto day = detail::floor_div(local, kSecondsPerDay);
        std::size_t j = i;
        while (j < series.size() && detail::floor_div(series.timestamps[j] + offset, kSecondsPerDay) == day) ++j;
        groups.push_back({day, i, j, j - i == per_day && local == day * kSecondsPerDay});
        i = j;
    }

    Segmentation seg;
    auto first = std::find_if(groups.begin(), groups.end(), [](const Group& g) { return g.complete; });
    if (first == groups.end()) throw Error(ErrorCode::NoCompleteDay, std::to_string(series.size()) + " readings");
    auto last = std::find_if(groups.rbegin(), groups.rend(), [](const Group& g) { return g.complete; }).base();
    for (auto g = groups.begin(); g != first; ++g) seg.report.leading_dropped += g->end - g->begin;
    for (auto g = last; g != groups.end(); ++g) seg.report.trailing_dropped += g->end - g->begin;
    for (auto g = first; g != last; ++g) {
        if (!g->complete) {
            ++seg.report.anomalous_days;
            continue;
        }
        seg.days.push_back({g->day, {series.values.begin() + static_cast<std::ptrdiff_t>(g->begin),
                                     series.values.begin() + static_cast<std::ptrdiff_t>(g->end)}});
    }
    seg.report.complete_days = seg.days.size();
    return seg;
}

/// Chronological train / validation / test split; validation is the tail of the train pool.
inline DatasetSplit split_dataset(const std::vector<DaySample>& days, const SplitSpec& spec = {}) {
    if (!(spec.train_fraction > 0.0 && spec.train_fraction < 1.0) ||
        !(spec.validation_fraction_of_train > 0.0 && spec.validation_fraction_of_train < 1.0))
        throw Error(ErrorCode::InvalidConfig, "split fractions must lie in (0,1)");
    if (days.size() < 8) throw Error(ErrorCode::TooFewDays, std::to_string(days.size()) + " days, need at least 8");
    const auto n = days.size();
    const auto pool = static_cast<std::size_t>(std::floor(spec.train_fraction * static_cast<double>(n)));
    const auto val = static_cast<std::size_t>(std::floor(static_cast<double>(pool) * spec.validation_fraction_of_train));
    if (pool - val < 1 || val < 1 || pool >= n)
        throw Error(ErrorCode::TooFewDays, "split leaves an empty partition");
    DatasetSplit split;
    split.train.assign(days.begin(), days.begin() + static_cast<std::ptrdiff_t>(pool - val));
    split.validation.assign(days.begin() + static_cast<std::ptrdiff_t>(pool - val),
                            days.begin() + static_cast<std::ptrdiff_t>(pool));
    split.test.assign(days.begin() + static_cast<std::ptrdiff_t>(pool), days.end());
    return split;
}

// ---------------------------------------------------------------------------
// Synthetic streams
// ---------------------------------------------------------------------------

/// Daily load shape: a base load plus two Gaussian bumps (morning and evening peaks).
struct DailyProfile {
    double base_kwh = 2.0;
    double morning_peak_kwh = 1.0;
    double morning_hour = 7.5;
    double evening_peak_kwh = 1.5;
    double evening_hour = 19.0;
    double peak_width_hours = 1.5;
};

enum class DriftKind { MeanShift, ScaleShift, ShapeSwap };

/// `day` is a zero-based day number; the event applies from that day onward.
/// MeanShift adds `magnitude` kWh, ScaleShift multiplies the profile by (1 + magnitude),
/// ShapeSwap moves both peaks by `magnitude` hours.
struct DriftEvent {
    std::int64_t day = 0;
    DriftKind kind = DriftKind::MeanShift;
    double magnitude = 0.0;
};

struct SyntheticSpec {
    DailyProfile profile;
    std::vector<DriftEvent> drift_events;
    double noise_sd = 0.1;
    std::uint64_t seed = 0;
    std::int64_t n_days = 30;
    std::int64_t start_time = 1609459200; // 2021-01-01T00:00:00Z
    std::int64_t resolution_s = 600;
};

inline double profile_value(const DailyProfile& p, double hour, double mean_offset, double scale, double phase) {
    auto bump = [&](double centre) {
        double d = std::fmod(std::abs(hour - (centre + phase)), 24.0);
        d = std::min(d, 24.0 - d);
        return std::exp(-0.5 * d * d / (p.peak_width_hours * p.peak_width_hours));
    };
    return scale * (p.base_kwh + p.morning_peak_kwh * bump(p.morning_hour) + p.evening_peak_kwh * bump(p.evening_hour)) +
           mean_offset;
}

inline LoadSeries generate_synthetic(const SyntheticSpec& spec) {
    if (spec.n_days < 1) throw Error(ErrorCode::EmptySeries, "n_days must be at least 1");
    if (spec.resolution_s <= 0 || kSecondsPerDay % spec.resolution_s != 0)
        throw Error(ErrorCode::InvalidResolution, "resolution must divide a day");
    for (const auto& e : spec.drift_events)
        if (e.day < 0 || e.day >= spec.n_days)
            throw Error(ErrorCode::InvalidEvent, "event day " + std::to_string(e.day) + " outside [0, " +
                                                     std::to_string(spec.n_days) + ")");
    std::mt19937_64 rng(spec.seed);
    std::normal_distribution<double> noise(0.0, 1.0);
    const auto per_day = static_cast<std::size_t>(kSecondsPerDay / spec.resolution_s);

    LoadSeries series;
    series.start_time = spec.start_time;
    series.resolution_s = spec.resolution_s;
    series.timestamps.reserve(per_day * static_cast<std::size_t>(spec.n_days));
    series.values.reserve(per_day * static_cast<std::size_t>(spec.n_days));
    for (std::int64_t day = 0; day < spec.n_days; ++day) {
        double offset = 0.0, scale = 1.0, phase = 0.0;
        for (const auto& e : spec.drift_events) {
            if (e.day > day) continue;
            switch (e.kind) {
            case DriftKind::MeanShift: offset += e.magnitude; break;
            case DriftKind::ScaleShift: scale *= 1.0 + e.magnitude; break;
            case DriftKind::ShapeSwap: phase += e.magnitude; break;
            }
        }
        for (std::size_t k = 0; k < per_day; ++k) {
            const double hour = 24.0 * static_cast<double>(k) / static_cast<double>(per_day);
            double v = profile_value(spec.profile, hour, offset, scale, phase);
            if (spec.noise_sd > 0.0) v += spec.noise_sd * noise(rng);
            series.timestamps.push_back(spec.start_time + (day * static_cast<std::int64_t>(per_day) +
                                                           static_cast<std::int64_t>(k)) *
                                                              spec.resolution_s);
            series.values.push_back(std::max(v, 0.0));
        }
    }
    return series;
}

} // namespace dalstm
