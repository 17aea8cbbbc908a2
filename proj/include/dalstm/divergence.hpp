#pragma once

#include "dalstm/density.hpp"
#include "dalstm/error.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace dalstm {

enum class LogBase { Two, E };

enum class DivergenceKind { Jsd, SqrtJsd };

struct DivergenceValue {
    double value = 0.0;
    DivergenceKind kind = DivergenceKind::Jsd;
    Grid grid;
};

namespace detail {

inline double log_in(double x, LogBase base) { return base == LogBase::Two ? std::log2(x) : std::log(x); }

inline void require_same_grid(const DensityEstimate& p, const DensityEstimate& q) {
    if (!(p.grid == q.grid) || p.density.size() != q.density.size())
        throw Error(ErrorCode::GridMismatch, "densities are evaluated on different grids");
}

} // namespace detail

/// -integral p log p with 0 log 0 = 0.
inline double shannon_entropy(const DensityEstimate& p, LogBase base = LogBase::Two) {
    const double m = mass(p);
    if (std::abs(m - 1.0) > 1e-2)
        throw Error(ErrorCode::UnnormalizedDensity, "mass " + std::to_string(m));
    std::vector<double> integrand(p.density.size());
    std::transform(p.density.begin(), p.density.end(), integrand.begin(),
                   [base](double v) { return v > 0.0 ? -v * detail::log_in(v, base) : 0.0; });
    return trapezoid(p.grid, integrand);
}

/// integral p log(p/q); the integrand is zero where p = 0 and q is floored at 1e-300.
inline double kl_divergence(const DensityEstimate& p, const DensityEstimate& q, LogBase base = LogBase::Two) {
    detail::require_same_grid(p, q);
    std::vector<double> integrand(p.density.size());
    for (std::size_t j = 0; j < integrand.size(); ++j) {
        const double pj = p.density[j];
        integrand[j] = pj > 0.0 ? pj * detail::log_in(pj / std::max(q.density[j], 1e-300), base) : 0.0;
    }
    return trapezoid(p.grid, integrand);
}

/// Jensen-Shannon divergence as the mean KL of each density to their midpoint mixture.
/// In base 2 the value is clamped to [0, 1].
inline DivergenceValue jsd(const DensityEstimate& p, const DensityEstimate& q, LogBase base = LogBase::Two) {
    detail::require_same_grid(p, q);
    const std::size_t n = p.density.size();
    std::vector<double> integrand(n);
    for (std::size_t j = 0; j < n; ++j) {
        const double pj = p.density[j], qj = q.density[j];
        const double mj = 0.5 * (pj + qj);
        double v = 0.0;
        // mj > 0 wherever pj or qj is, so no floor is needed here.
        if (pj > 0.0) v += pj * detail::log_in(pj / mj, base);
        if (qj > 0.0) v += qj * detail::log_in(qj / mj, base);
        integrand[j] = 0.5 * v;
    }
    const double upper = base == LogBase::Two ? 1.0 : std::numbers::ln2;
    return {std::clamp(trapezoid(p.grid, integrand), 0.0, upper), DivergenceKind::Jsd, p.grid};
}

/// Square root of the JSD; a metric on densities.
inline DivergenceValue sqrt_jsd(const DensityEstimate& p, const DensityEstimate& q, LogBase base = LogBase::Two) {
    auto d = jsd(p, q, base);
    d.value = std::sqrt(d.value);
    d.kind = DivergenceKind::SqrtJsd;
    return d;
}

} // namespace dalstm
