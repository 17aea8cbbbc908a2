#pragma once

#include "dalstm/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace dalstm {

/// Equally spaced evaluation points on [lo, hi].
struct Grid {
    double lo = 0.0;
    double hi = 1.0;
    std::size_t n_points = 512;

    double step() const noexcept { return (hi - lo) / static_cast<double>(n_points - 1); }
    double point(std::size_t j) const noexcept {
        return j + 1 == n_points ? hi : lo + static_cast<double>(j) * step();
    }
    bool operator==(const Grid&) const = default;
};

inline void validate(const Grid& grid) {
    if (!(grid.lo < grid.hi) || !std::isfinite(grid.lo) || !std::isfinite(grid.hi))
        throw Error(ErrorCode::InvalidGrid, "need lo < hi");
    if (grid.n_points < 16) throw Error(ErrorCode::InvalidGrid, "need at least 16 points");
}

/// Gaussian KDE evaluated on a grid; `density` is per unit of the sample variable.
struct DensityEstimate {
    Grid grid;
    std::vector<double> density;
    double bandwidth = 1.0;
    std::size_t n_samples = 0;
};

/// Trapezoid rule of `f` sampled on `grid`.
inline double trapezoid(const Grid& grid, std::span<const double> f) {
    if (f.size() < 2) return 0.0;
    double sum = 0.5 * (f.front() + f.back());
    for (std::size_t j = 1; j + 1 < f.size(); ++j) sum += f[j];
    return sum * grid.step();
}

inline double mass(const DensityEstimate& p) { return trapezoid(p.grid, p.density); }

/// density[j] = 1/(n h) * sum_i phi((g_j - y_i) / h), phi the standard normal pdf.
inline DensityEstimate estimate_kde(std::span<const double> values, double bandwidth, const Grid& grid) {
    if (values.empty()) throw Error(ErrorCode::EmptyInput, "KDE needs at least one sample");
    if (!(bandwidth > 0.0) || !std::isfinite(bandwidth))
        throw Error(ErrorCode::NonPositiveBandwidth, "bandwidth " + std::to_string(bandwidth));
    validate(grid);

    DensityEstimate est;
    est.grid = grid;
    est.bandwidth = bandwidth;
    est.n_samples = values.size();
    est.density.assign(grid.n_points, 0.0);

    const double inv_h = 1.0 / bandwidth;
    const double norm = 1.0 / (static_cast<double>(values.size()) * bandwidth * std::sqrt(2.0 * std::numbers::pi));
    for (std::size_t j = 0; j < grid.n_points; ++j) {
        const double g = grid.point(j);
        double acc = 0.0;
        for (double y : values) {
            const double u = (g - y) * inv_h;
            acc += std::exp(-0.5 * u * u);
        }
        est.density[j] = acc * norm;
    }
    return est;
}

/// Common support for two samples: data range padded by five bandwidths on each side.
inline Grid shared_grid(std::span<const double> a, std::span<const double> b, double bandwidth,
                        std::size_t n_points = 512) {
    if (a.empty() || b.empty()) throw Error(ErrorCode::EmptyInput, "shared grid needs two non-empty samples");
    if (!(bandwidth > 0.0)) throw Error(ErrorCode::NonPositiveBandwidth, "bandwidth " + std::to_string(bandwidth));
    const auto [amin, amax] = std::minmax_element(a.begin(), a.end());
    const auto [bmin, bmax] = std::minmax_element(b.begin(), b.end());
    Grid grid{std::min(*amin, *bmin) - 5.0 * bandwidth, std::max(*amax, *bmax) + 5.0 * bandwidth, n_points};
    validate(grid);
    return grid;
}

} // namespace dalstm
