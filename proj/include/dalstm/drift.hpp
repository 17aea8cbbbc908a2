#pragma once

#include "dalstm/density.hpp"
#include "dalstm/divergence.hpp"
#include "dalstm/error.hpp"
#include "dalstm/ingest.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numbers>
#include <span>
#include <vector>

namespace dalstm {

struct DriftConfig {
    double load_bandwidth = 10.0;          // kWh, fixed for every sample of a run
    std::size_t grid_points = 512;         // load-density grid
    std::size_t history_grid_points = 2048; // minimum resolution of the divergence-history grid
    bool rank_fallback = false;            // empirical-rank p-value for short histories
    std::size_t rank_fallback_below = 10;
    LogBase log_base = LogBase::Two;
};

/// Evolving detector state: the pooled readings of every processed day and the
/// divergence of each day against the pool that preceded it.
struct DriftState {
    DriftConfig config;
    std::vector<double> reference_readings;
    std::vector<double> divergence_history;

    /// Largest attainable sqrt-JSD in the configured log base.
    double divergence_ceiling() const noexcept {
        return config.log_base == LogBase::Two ? 1.0 : std::sqrt(std::numbers::ln2);
    }
};

struct DriftDecision {
    std::int64_t day_index = 0;
    double divergence = 0.0;
    double p_value = 1.0;
    bool is_drift = false;
    double tau = 0.0;
};

namespace detail {

inline double sqrt_jsd_between(std::span<const double> a, std::span<const double> b, const DriftConfig& cfg) {
    const Grid grid = shared_grid(a, b, cfg.load_bandwidth, cfg.grid_points);
    const auto pa = estimate_kde(a, cfg.load_bandwidth, grid);
    const auto pb = estimate_kde(b, cfg.load_bandwidth, grid);
    return sqrt_jsd(pa, pb, cfg.log_base).value;
}

} // namespace detail

/// Silverman's rule of thumb, 0.9 min(sd, IQR/1.34) n^(-1/5), floored at `floor`.
inline double silverman_bandwidth(std::span<const double> values, double floor) {
    const auto n = values.size();
    if (n < 2) return floor;
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));

    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    auto quantile = [&](double q) {
        const double pos = q * static_cast<double>(n - 1);
        const auto lo = static_cast<std::size_t>(std::floor(pos));
        const auto hi = std::min(lo + 1, n - 1);
        return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
    };
    const double iqr = (quantile(0.75) - quantile(0.25)) / 1.34;
    double spread = std::min(sd, iqr);
    if (!(spread > 0.0)) spread = std::max(sd, iqr);
    return std::max(0.9 * spread * std::pow(static_cast<double>(n), -0.2), floor);
}

inline double history_bandwidth(const DriftState& state) {
    return silverman_bandwidth(state.divergence_history, 1e-3 * state.divergence_ceiling());
}

/// Seeds the divergence history from the training days: day k is compared against
/// the pool of days 0..k-1, giving d-1 values for d days.
inline DriftState init_drift_state(const std::vector<DaySample>& train_days, const DriftConfig& config = {}) {
    if (train_days.size() < 2)
        throw Error(ErrorCode::InsufficientHistory, std::to_string(train_days.size()) + " training day(s)");
    DriftState state;
    state.config = config;
    state.reference_readings = train_days.front().readings;
    for (std::size_t k = 1; k < train_days.size(); ++k) {
        const auto& day = train_days[k].readings;
        state.divergence_history.push_back(detail::sqrt_jsd_between(day, state.reference_readings, config));
        state.reference_readings.insert(state.reference_readings.end(), day.begin(), day.end());
    }
    return state;
}

/// sqrt-JSD between the new day's KDE and the KDE of the reference pool.
inline double compute_divergence(const DriftState& state, const DaySample& new_day) {
    if (state.reference_readings.empty())
        throw Error(ErrorCode::InsufficientHistory, "drift state is not initialized");
    return detail::sqrt_jsd_between(new_day.readings, state.reference_readings, state.config);
}

/// Upper-tail mass at `divergence` of the KDE fitted to the divergence history.
/// The result is kept strictly below 1: a full-support kernel density always leaves
/// some mass to the left of any point.
inline double p_value(const DriftState& state, double divergence) {
    const auto& hist = state.divergence_history;
    if (hist.empty()) throw Error(ErrorCode::EmptyHistory, "no divergence history");
    constexpr double kBelowOne = 0x1.fffffffffffffp-1;

    if (state.config.rank_fallback && hist.size() < state.config.rank_fallback_below) {
        const auto above = std::count_if(hist.begin(), hist.end(), [&](double v) { return v > divergence; });
        const double p = static_cast<double>(above + 1) / static_cast<double>(hist.size() + 1);
        return std::clamp(p, 0.0, kBelowOne);
    }

    const double h = history_bandwidth(state);
    const double ceiling = state.divergence_ceiling();
    const double lo = -5.0 * h;
    const double hi = ceiling + 5.0 * h;
    const double needed = std::ceil((hi - lo) / (h / 8.0)) + 1.0;
    const auto n_points = static_cast<std::size_t>(
        std::clamp(needed, static_cast<double>(state.config.history_grid_points), 65536.0));
    const Grid grid{lo, hi, n_points};
    const auto pdf = estimate_kde(hist, h, grid);
    const double total = mass(pdf);

    if (divergence <= lo) return kBelowOne;
    if (divergence >= hi) return 0.0;
    const double step = grid.step();
    auto k = static_cast<std::size_t>(std::floor((divergence - lo) / step));
    k = std::min(k, n_points - 2);
    const double g0 = grid.point(k), g1 = grid.point(k + 1);
    const double w = (divergence - g0) / (g1 - g0);
    const double f_at = pdf.density[k] + w * (pdf.density[k + 1] - pdf.density[k]);
    double tail = 0.5 * (f_at + pdf.density[k + 1]) * (g1 - divergence);
    for (std::size_t j = k + 1; j + 1 < n_points; ++j) tail += 0.5 * (pdf.density[j] + pdf.density[j + 1]) * step;
    return std::clamp(tail / total, 0.0, kBelowOne);
}

inline DriftDecision decide(const DriftState& state, const DaySample& new_day, double tau) {
    if (!(tau >= 0.0 && tau <= 1.0)) throw Error(ErrorCode::InvalidTau, std::to_string(tau));
    DriftDecision d;
    d.day_index = new_day.day_index;
    d.tau = tau;
    d.divergence = compute_divergence(state, new_day);
    d.p_value = p_value(state, d.divergence);
    d.is_drift = d.p_value < tau;
    return d;
}

/// Records the day in both the divergence history and the reference pool. Runs on every
/// day, whether or not it was flagged.
inline DriftState advance(DriftState state, const DaySample& new_day, double divergence) {
    if (!(divergence >= 0.0 && divergence <= state.divergence_ceiling()))
        throw Error(ErrorCode::OutOfRangeDivergence, std::to_string(divergence));
    state.divergence_history.push_back(divergence);
    state.reference_readings.insert(state.reference_readings.end(), new_day.readings.begin(), new_day.readings.end());
    return state;
}

} // namespace dalstm
