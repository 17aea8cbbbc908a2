#pragma once

#include "dalstm/error.hpp"
#include "dalstm/forecaster.hpp"

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <type_traits>
#include <vector>

namespace dalstm {

/// Discrete hyperparameter grid. With `structural_frozen` the unit count is pinned to a
/// single value, as required when adapting an already trained network.
struct SearchSpace {
    std::vector<double> learning_rates{0.0001, 0.001, 0.01};
    std::vector<double> dropout_rates{0.0, 0.1, 0.2, 0.3, 0.4, 0.5};
    std::vector<std::size_t> n_units{32, 64, 96, 128, 160, 192, 224, 256, 288, 320, 352, 384, 416, 448, 480, 512};
    bool structural_frozen = false;

    std::size_t size() const noexcept { return learning_rates.size() * dropout_rates.size() * n_units.size(); }

    Hyperparameters at(std::size_t flat) const {
        const std::size_t nd = dropout_rates.size(), nu = n_units.size();
        return {learning_rates[flat / (nd * nu)], dropout_rates[(flat / nu) % nd], n_units[flat % nu]};
    }
};

/// The same grid restricted to the unit count of a trained model.
inline SearchSpace freeze_structure(SearchSpace space, std::size_t n_units) {
    space.n_units = {n_units};
    space.structural_frozen = true;
    return space;
}

struct TrialRecord {
    Hyperparameters hyperparameters;
    double score = 0.0;       // validation MAPE, lower is better
    double duration_s = 0.0;
};

struct TrialOutcome {
    double score = 0.0;
    double duration_s = 0.0;
};

struct ProposeOptions {
    std::size_t n_init = 5; // random proposals before the surrogate takes over
    double xi = 0.01;       // exploration margin, in standardized score units
};

struct OptimizationResult {
    Hyperparameters best;
    double best_score = std::numeric_limits<double>::infinity();
    std::vector<TrialRecord> history;
};

namespace detail {

inline void validate(const SearchSpace& space) {
    if (space.learning_rates.empty() || space.dropout_rates.empty() || space.n_units.empty())
        throw Error(ErrorCode::InvalidSpace, "every dimension needs at least one choice");
    if (space.structural_frozen && space.n_units.size() != 1)
        throw Error(ErrorCode::InvalidSpace, "a frozen space must pin n_units to one value");
}

template <class T>
std::ptrdiff_t index_of(const std::vector<T>& choices, T value) {
    auto it = std::find(choices.begin(), choices.end(), value);
    return it == choices.end() ? -1 : it - choices.begin();
}

/// Flat index of `hp` in the space, or -1 if it is not a grid point.
inline std::ptrdiff_t flat_index(const SearchSpace& s, const Hyperparameters& hp) {
    const auto a = index_of(s.learning_rates, hp.learning_rate);
    const auto b = index_of(s.dropout_rates, hp.dropout_rate);
    const auto c = index_of(s.n_units, hp.n_units);
    if (a < 0 || b < 0 || c < 0) return -1;
    const auto nd = static_cast<std::ptrdiff_t>(s.dropout_rates.size());
    const auto nu = static_cast<std::ptrdiff_t>(s.n_units.size());
    return (a * nd + b) * nu + c;
}

/// Ordinal position of each coordinate scaled to [0, 1].
inline std::array<double, 3> coordinates(const SearchSpace& s, std::size_t flat) {
    const std::size_t nd = s.dropout_rates.size(), nu = s.n_units.size();
    const std::size_t idx[3] = {flat / (nd * nu), (flat / nu) % nd, flat % nu};
    const std::size_t len[3] = {s.learning_rates.size(), nd, nu};
    std::array<double, 3> x{};
    for (int k = 0; k < 3; ++k)
        x[k] = len[k] > 1 ? static_cast<double>(idx[k]) / static_cast<double>(len[k] - 1) : 0.0;
    return x;
}

/// Exact GP regression with a unit-variance squared-exponential kernel.
class GaussianProcess {
public:
    GaussianProcess(std::vector<std::array<double, 3>> x, std::vector<double> y, double length_scale,
                    double noise = 1e-6)
        : x_(std::move(x)), ell_(length_scale) {
        const std::size_t n = x_.size();
        L_.assign(n * n, 0.0);
        for (std::size_t r = 0; r < n; ++r)
            for (std::size_t c = 0; c <= r; ++c) L_[r * n + c] = kernel(x_[r], x_[c]) + (r == c ? noise : 0.0);
        cholesky(n);
        alpha_ = solve(y);
        log_marginal_ = 0.0;
        for (std::size_t k = 0; k < n; ++k) log_marginal_ -= std::log(L_[k * n + k]) + 0.5 * y[k] * alpha_[k];
        log_marginal_ -= 0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
    }

    double log_marginal_likelihood() const noexcept { return log_marginal_; }

    /// Posterior mean and standard deviation at `q`.
    std::pair<double, double> predict(const std::array<double, 3>& q) const {
        const std::size_t n = x_.size();
        std::vector<double> k(n);
        for (std::size_t i = 0; i < n; ++i) k[i] = kernel(q, x_[i]);
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += k[i] * alpha_[i];
        // v = L^-1 k
        for (std::size_t r = 0; r < n; ++r) {
            double s = k[r];
            for (std::size_t c = 0; c < r; ++c) s -= L_[r * n + c] * k[c];
            k[r] = s / L_[r * n + r];
        }
        double var = 1.0;
        for (double v : k) var -= v * v;
        return {mean, std::sqrt(std::max(var, 0.0))};
    }

private:
    double kernel(const std::array<double, 3>& a, const std::array<double, 3>& b) const {
        double d2 = 0.0;
        for (int k = 0; k < 3; ++k) d2 += (a[k] - b[k]) * (a[k] - b[k]);
        return std::exp(-0.5 * d2 / (ell_ * ell_));
    }

    void cholesky(std::size_t n) {
        for (std::size_t j = 0; j < n; ++j) {
            double d = L_[j * n + j];
            for (std::size_t k = 0; k < j; ++k) d -= L_[j * n + k] * L_[j * n + k];
            d = std::sqrt(std::max(d, 1e-12));
            L_[j * n + j] = d;
            for (std::size_t r = j + 1; r < n; ++r) {
                double s = L_[r * n + j];
                for (std::size_t k = 0; k < j; ++k) s -= L_[r * n + k] * L_[j * n + k];
                L_[r * n + j] = s / d;
            }
        }
    }

    std::vector<double> solve(std::vector<double> b) const {
        const std::size_t n = x_.size();
        for (std::size_t r = 0; r < n; ++r) {
            for (std::size_t c = 0; c < r; ++c) b[r] -= L_[r * n + c] * b[c];
            b[r] /= L_[r * n + r];
        }
        for (std::size_t r = n; r-- > 0;) {
            for (std::size_t c = r + 1; c < n; ++c) b[r] -= L_[c * n + r] * b[c];
            b[r] /= L_[r * n + r];
        }
        return b;
    }

    std::vector<std::array<double, 3>> x_;
    double ell_;
    std::vector<double> L_;
    std::vector<double> alpha_;
    double log_marginal_ = 0.0;
};

inline double expected_improvement(double best, double mean, double sd, double xi) {
    const double gain = best - mean - xi;
    if (sd < 1e-12) return std::max(gain, 0.0);
    const double z = gain / sd;
    const double cdf = 0.5 * std::erfc(-z / std::numbers::sqrt2);
    const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * std::numbers::pi);
    return gain * cdf + sd * pdf;
}

} // namespace detail

/// Next point to evaluate. The first `n_init` proposals are seeded random picks among
/// unexplored points; afterwards a GP is fitted to the history and the unexplored point
/// with maximal expected improvement is returned. Throws ExhaustedSpace when every grid
/// point has been tried.
inline Hyperparameters propose(const std::vector<TrialRecord>& history, const SearchSpace& space,
                               std::uint64_t seed, const ProposeOptions& opts = {}) {
    detail::validate(space);
    std::vector<bool> explored(space.size(), false);
    std::vector<std::array<double, 3>> xs;
    std::vector<double> ys;
    for (const auto& rec : history) {
        const auto idx = detail::flat_index(space, rec.hyperparameters);
        if (idx < 0) continue;
        explored[static_cast<std::size_t>(idx)] = true;
        xs.push_back(detail::coordinates(space, static_cast<std::size_t>(idx)));
        ys.push_back(rec.score);
    }
    std::vector<std::size_t> open;
    for (std::size_t k = 0; k < space.size(); ++k)
        if (!explored[k]) open.push_back(k);
    if (open.empty()) throw Error(ErrorCode::ExhaustedSpace, std::to_string(space.size()) + " points tried");

    if (history.size() < opts.n_init || xs.size() < 2) {
        std::mt19937_64 rng(detail::mix_seed(seed, history.size()));
        std::uniform_int_distribution<std::size_t> pick(0, open.size() - 1);
        return space.at(open[pick(rng)]);
    }

    double mean = 0.0;
    for (double y : ys) mean += y;
    mean /= static_cast<double>(ys.size());
    double var = 0.0;
    for (double y : ys) var += (y - mean) * (y - mean);
    const double sd = var > 0.0 ? std::sqrt(var / static_cast<double>(ys.size())) : 1.0;
    for (double& y : ys) y = (y - mean) / sd;
    const double best = *std::min_element(ys.begin(), ys.end());

    // length scale by maximum marginal likelihood over a small ladder
    std::optional<detail::GaussianProcess> gp;
    for (double ell : {0.05, 0.1, 0.2, 0.3, 0.5, 0.8, 1.2}) {
        detail::GaussianProcess candidate(xs, ys, ell);
        if (!gp || candidate.log_marginal_likelihood() > gp->log_marginal_likelihood()) gp = std::move(candidate);
    }

    std::size_t chosen = open.front();
    double best_ei = -1.0;
    for (std::size_t k : open) {
        const auto [mu, s] = gp->predict(detail::coordinates(space, k));
        const double ei = detail::expected_improvement(best, mu, s, opts.xi);
        if (ei > best_ei) best_ei = ei, chosen = k;
    }
    return space.at(chosen);
}

/// Runs `budget` propose/evaluate rounds (fewer if the space runs out). `objective` maps
/// Hyperparameters to either a TrialOutcome or a bare score; bare scores are timed with
/// the wall clock.
template <class Objective>
OptimizationResult optimize(Objective&& objective, const SearchSpace& space, std::size_t budget, std::uint64_t seed,
                            const ProposeOptions& opts = {}) {
    if (budget < 1) throw Error(ErrorCode::InvalidConfig, "HPO budget must be at least 1");
    OptimizationResult result;
    for (std::size_t trial = 0; trial < budget; ++trial) {
        Hyperparameters hp;
        try {
            hp = propose(result.history, space, seed, opts);
        } catch (const Error& e) {
            if (e.code() == ErrorCode::ExhaustedSpace) break;
            throw;
        }
        TrialRecord rec{hp, 0.0, 0.0};
        if constexpr (std::is_convertible_v<std::invoke_result_t<Objective&, const Hyperparameters&>, double>) {
            const auto t0 = std::chrono::steady_clock::now();
            rec.score = objective(hp);
            rec.duration_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        } else {
            const TrialOutcome out = objective(hp);
            rec.score = out.score;
            rec.duration_s = out.duration_s;
        }
        if (!std::isfinite(rec.score)) throw Error(ErrorCode::InvalidConfig, "objective returned a non-finite score");
        if (rec.score < result.best_score) {
            result.best_score = rec.score;
            result.best = hp;
        }
        result.history.push_back(rec);
    }
    return result;
}

} // namespace dalstm
