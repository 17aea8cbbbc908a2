#pragma once

#include "dalstm/error.hpp"
#include "dalstm/ingest.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dalstm {

struct Hyperparameters {
    double learning_rate = 0.001;
    double dropout_rate = 0.0;
    std::size_t n_units = 32;

    bool operator==(const Hyperparameters&) const = default;
};

/// Min-max scaling fitted on training readings.
struct NormStats {
    double min = 0.0;
    double max = 1.0;

    double span() const noexcept { return max > min ? max - min : 1.0; }
    double normalize(double x) const noexcept { return (x - min) / span(); }
    double denormalize(double x) const noexcept { return x * span() + min; }

    static NormStats fit(std::span<const double> values) {
        if (values.empty()) throw Error(ErrorCode::EmptyInput, "cannot fit normalization on no data");
        const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
        return {*lo, *hi};
    }
};

struct SupervisedWindow {
    std::vector<double> input;
    std::vector<double> target;
};

// ---------------------------------------------------------------------------
// Parameter layout
// ---------------------------------------------------------------------------

/// Named slices of the flat parameter vector. Gate tensors follow the peephole LSTM:
/// input weights W, recurrent weights R, peepholes p and biases b for the input (i),
/// forget (f) and output (o) gates; the block input (z) has no peephole. The dense
/// output layer is W_d (horizon x units) and b_d.
enum class Tensor : std::size_t {
    W_i, R_i, p_i, b_i,
    W_f, R_f, p_f, b_f,
    W_z, R_z, b_z,
    W_o, R_o, p_o, b_o,
    W_d, b_d,
    Count
};

inline constexpr std::array<std::string_view, static_cast<std::size_t>(Tensor::Count)> kTensorNames = {
    "W_i", "R_i", "p_i", "b_i", "W_f", "R_f", "p_f", "b_f", "W_z",
    "R_z", "b_z", "W_o", "R_o", "p_o", "b_o", "W_d", "b_d"};

struct TensorSlice {
    std::size_t offset = 0;
    std::size_t size = 0;
};

struct ParamLayout {
    std::size_t units = 0;
    std::size_t horizon = 0;
    std::array<TensorSlice, static_cast<std::size_t>(Tensor::Count)> slices{};
    std::size_t total = 0;

    ParamLayout() = default;
    ParamLayout(std::size_t n_units, std::size_t out) : units(n_units), horizon(out) {
        const std::size_t H = n_units;
        auto size_of = [&](Tensor t) -> std::size_t {
            switch (t) {
            case Tensor::R_i: case Tensor::R_f: case Tensor::R_z: case Tensor::R_o: return H * H;
            case Tensor::W_d: return out * H;
            case Tensor::b_d: return out;
            default: return H;
            }
        };
        for (std::size_t k = 0; k < slices.size(); ++k) {
            slices[k] = {total, size_of(static_cast<Tensor>(k))};
            total += slices[k].size;
        }
    }

    const TensorSlice& operator[](Tensor t) const { return slices[static_cast<std::size_t>(t)]; }
};

// ---------------------------------------------------------------------------
// Model
// ---------------------------------------------------------------------------

struct ForecastModel {
    Hyperparameters hyperparameters;
    std::size_t input_len = 12;
    std::size_t horizon = 6;
    NormStats norm;
    std::uint64_t rng_seed = 0;
    std::uint64_t version = 0;
    std::vector<double> params;

    ParamLayout layout() const { return {hyperparameters.n_units, horizon}; }

    std::span<double> tensor(Tensor t) {
        const auto s = layout()[t];
        return std::span<double>(params).subspan(s.offset, s.size);
    }
    std::span<const double> tensor(Tensor t) const {
        const auto s = layout()[t];
        return std::span<const double>(params).subspan(s.offset, s.size);
    }
};

/// Fresh model with weights uniform in [-1/sqrt(units), 1/sqrt(units)].
inline ForecastModel make_model(const Hyperparameters& hp, const NormStats& norm, std::uint64_t seed,
                                std::size_t input_len = 12, std::size_t horizon = 6) {
    if (hp.n_units == 0 || input_len == 0 || horizon == 0)
        throw Error(ErrorCode::ShapeMismatch, "units, input length and horizon must be positive");
    ForecastModel m;
    m.hyperparameters = hp;
    m.input_len = input_len;
    m.horizon = horizon;
    m.norm = norm;
    m.rng_seed = seed;
    m.params.resize(m.layout().total);
    const double bound = 1.0 / std::sqrt(static_cast<double>(hp.n_units));
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (double& w : m.params) w = dist(rng);
    return m;
}

/// All maximal windows of `input_len` inputs followed by `horizon` targets.
inline std::vector<SupervisedWindow> build_windows(std::span<const double> series, std::size_t input_len = 12,
                                                   std::size_t horizon = 6, std::size_t stride = 1) {
    if (input_len == 0 || horizon == 0 || stride == 0)
        throw Error(ErrorCode::ShapeMismatch, "window lengths and stride must be positive");
    std::vector<SupervisedWindow> out;
    if (series.size() < input_len + horizon) return out;
    for (std::size_t s = 0; s + input_len + horizon <= series.size(); s += stride) {
        out.push_back({{series.begin() + static_cast<std::ptrdiff_t>(s),
                        series.begin() + static_cast<std::ptrdiff_t>(s + input_len)},
                       {series.begin() + static_cast<std::ptrdiff_t>(s + input_len),
                        series.begin() + static_cast<std::ptrdiff_t>(s + input_len + horizon)}});
    }
    return out;
}

/// Windows over raw readings, scaled with the model's training statistics.
inline std::vector<SupervisedWindow> normalized_windows(const ForecastModel& model, std::span<const double> readings,
                                                        std::size_t stride = 1) {
    std::vector<double> scaled(readings.size());
    std::transform(readings.begin(), readings.end(), scaled.begin(),
                   [&](double v) { return model.norm.normalize(v); });
    return build_windows(scaled, model.input_len, model.horizon, stride);
}

// ---------------------------------------------------------------------------
// Forward / backward
// ---------------------------------------------------------------------------

namespace detail {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// Per-step activations kept for backpropagation through time.
struct LstmTrace {
    std::size_t steps = 0, units = 0;
    std::vector<double> i, f, z, o, c, h; // (steps + 1) x units for c and h, index 0 = initial state
    std::vector<double> dropped;          // final hidden state after the dropout mask

    void reset(std::size_t T, std::size_t H) {
        steps = T;
        units = H;
        i.assign(T * H, 0.0);
        f.assign(T * H, 0.0);
        z.assign(T * H, 0.0);
        o.assign(T * H, 0.0);
        c.assign((T + 1) * H, 0.0);
        h.assign((T + 1) * H, 0.0);
        dropped.assign(H, 0.0);
    }
};

inline void forward_trace(const ForecastModel& m, std::span<const double> input, std::span<const double> mask,
                          LstmTrace& tr, std::span<double> out) {
    const std::size_t H = m.hyperparameters.n_units, T = input.size();
    tr.reset(T, H);
    const auto Wi = m.tensor(Tensor::W_i), Ri = m.tensor(Tensor::R_i), pi = m.tensor(Tensor::p_i),
               bi = m.tensor(Tensor::b_i);
    const auto Wf = m.tensor(Tensor::W_f), Rf = m.tensor(Tensor::R_f), pf = m.tensor(Tensor::p_f),
               bf = m.tensor(Tensor::b_f);
    const auto Wz = m.tensor(Tensor::W_z), Rz = m.tensor(Tensor::R_z), bz = m.tensor(Tensor::b_z);
    const auto Wo = m.tensor(Tensor::W_o), Ro = m.tensor(Tensor::R_o), po = m.tensor(Tensor::p_o),
               bo = m.tensor(Tensor::b_o);
    const auto Wd = m.tensor(Tensor::W_d), bd = m.tensor(Tensor::b_d);

    for (std::size_t t = 0; t < T; ++t) {
        const double x = input[t];
        const double* hp = &tr.h[t * H];
        const double* cp = &tr.c[t * H];
        double* ct = &tr.c[(t + 1) * H];
        double* ht = &tr.h[(t + 1) * H];
        for (std::size_t u = 0; u < H; ++u) {
            double ai = Wi[u] * x + pi[u] * cp[u] + bi[u];
            double af = Wf[u] * x + pf[u] * cp[u] + bf[u];
            double az = Wz[u] * x + bz[u];
            double ao = Wo[u] * x + bo[u];
            const double* ri = &Ri[u * H];
            const double* rf = &Rf[u * H];
            const double* rz = &Rz[u * H];
            const double* ro = &Ro[u * H];
            for (std::size_t k = 0; k < H; ++k) {
                ai += ri[k] * hp[k];
                af += rf[k] * hp[k];
                az += rz[k] * hp[k];
                ao += ro[k] * hp[k];
            }
            const double ig = sigmoid(ai), fg = sigmoid(af), zg = std::tanh(az);
            ct[u] = zg * ig + cp[u] * fg;
            // the output gate peeks at the updated cell state
            const double og = sigmoid(ao + po[u] * ct[u]);
            ht[u] = og * std::tanh(ct[u]);
            tr.i[t * H + u] = ig;
            tr.f[t * H + u] = fg;
            tr.z[t * H + u] = zg;
            tr.o[t * H + u] = og;
        }
    }
    const double* hT = &tr.h[T * H];
    for (std::size_t u = 0; u < H; ++u) tr.dropped[u] = mask.empty() ? hT[u] : hT[u] * mask[u];
    for (std::size_t r = 0; r < m.horizon; ++r) {
        double acc = bd[r];
        for (std::size_t u = 0; u < H; ++u) acc += Wd[r * H + u] * tr.dropped[u];
        out[r] = acc;
    }
}

/// Accumulates d(loss)/d(params) into `grad` given d(loss)/d(output).
inline void backward_trace(const ForecastModel& m, std::span<const double> input, std::span<const double> mask,
                           const LstmTrace& tr, std::span<const double> d_out, std::span<double> grad) {
    const std::size_t H = tr.units, T = tr.steps;
    const ParamLayout L = m.layout();
    auto g = [&](Tensor t) { return grad.subspan(L[t].offset, L[t].size); };
    const auto Ri = m.tensor(Tensor::R_i), Rf = m.tensor(Tensor::R_f), Rz = m.tensor(Tensor::R_z),
               Ro = m.tensor(Tensor::R_o);
    const auto pi = m.tensor(Tensor::p_i), pf = m.tensor(Tensor::p_f), po = m.tensor(Tensor::p_o);
    const auto Wd = m.tensor(Tensor::W_d);
    auto gWi = g(Tensor::W_i), gRi = g(Tensor::R_i), gpi = g(Tensor::p_i), gbi = g(Tensor::b_i);
    auto gWf = g(Tensor::W_f), gRf = g(Tensor::R_f), gpf = g(Tensor::p_f), gbf = g(Tensor::b_f);
    auto gWz = g(Tensor::W_z), gRz = g(Tensor::R_z), gbz = g(Tensor::b_z);
    auto gWo = g(Tensor::W_o), gRo = g(Tensor::R_o), gpo = g(Tensor::p_o), gbo = g(Tensor::b_o);
    auto gWd = g(Tensor::W_d), gbd = g(Tensor::b_d);

    std::vector<double> dh(H, 0.0), dc(H, 0.0), dh_prev(H), dc_prev(H);
    std::vector<double> dai(H), daf(H), daz(H), dao(H);
    for (std::size_t r = 0; r < m.horizon; ++r) {
        gbd[r] += d_out[r];
        for (std::size_t u = 0; u < H; ++u) {
            gWd[r * H + u] += d_out[r] * tr.dropped[u];
            dh[u] += Wd[r * H + u] * d_out[r] * (mask.empty() ? 1.0 : mask[u]);
        }
    }
    for (std::size_t t = T; t-- > 0;) {
        const double x = input[t];
        const double* hp = &tr.h[t * H];
        const double* cp = &tr.c[t * H];
        const double* ct = &tr.c[(t + 1) * H];
        for (std::size_t u = 0; u < H; ++u) {
            const double ig = tr.i[t * H + u], fg = tr.f[t * H + u], zg = tr.z[t * H + u], og = tr.o[t * H + u];
            const double tc = std::tanh(ct[u]);
            dao[u] = dh[u] * tc * og * (1.0 - og);
            const double dct = dc[u] + dh[u] * og * (1.0 - tc * tc) + dao[u] * po[u];
            daz[u] = dct * ig * (1.0 - zg * zg);
            dai[u] = dct * zg * ig * (1.0 - ig);
            daf[u] = dct * cp[u] * fg * (1.0 - fg);
            dc_prev[u] = dct * fg + dai[u] * pi[u] + daf[u] * pf[u];
            gWi[u] += dai[u] * x;
            gWf[u] += daf[u] * x;
            gWz[u] += daz[u] * x;
            gWo[u] += dao[u] * x;
            gbi[u] += dai[u];
            gbf[u] += daf[u];
            gbz[u] += daz[u];
            gbo[u] += dao[u];
            gpi[u] += dai[u] * cp[u];
            gpf[u] += daf[u] * cp[u];
            gpo[u] += dao[u] * ct[u];
        }
        std::fill(dh_prev.begin(), dh_prev.end(), 0.0);
        for (std::size_t u = 0; u < H; ++u) {
            const std::size_t row = u * H;
            for (std::size_t k = 0; k < H; ++k) {
                gRi[row + k] += dai[u] * hp[k];
                gRf[row + k] += daf[u] * hp[k];
                gRz[row + k] += daz[u] * hp[k];
                gRo[row + k] += dao[u] * hp[k];
                dh_prev[k] += Ri[row + k] * dai[u] + Rf[row + k] * daf[u] + Rz[row + k] * daz[u] +
                              Ro[row + k] * dao[u];
            }
        }
        std::swap(dh, dh_prev);
        std::swap(dc, dc_prev);
    }
}

} // namespace detail

/// Inference on one normalized input window; dropout is inactive.
inline std::vector<double> lstm_forward(const ForecastModel& model, std::span<const double> input) {
    if (input.size() != model.input_len)
        throw Error(ErrorCode::ShapeMismatch, "expected " + std::to_string(model.input_len) + " inputs");
    for (double v : input)
        if (!std::isfinite(v)) throw Error(ErrorCode::NonFiniteInput, "input contains a non-finite value");
    detail::LstmTrace tr;
    std::vector<double> out(model.horizon);
    detail::forward_trace(model, input, {}, tr, out);
    return out;
}

/// Mean squared error over all windows and outputs. If `grad` is non-empty it receives
/// the gradient of that loss. `masks`, when given, holds one dropout mask per window.
inline double loss_and_gradient(const ForecastModel& model, std::span<const SupervisedWindow> windows,
                                std::span<double> grad, std::span<const std::vector<double>> masks = {}) {
    if (windows.empty()) return 0.0;
    std::fill(grad.begin(), grad.end(), 0.0);
    detail::LstmTrace tr;
    std::vector<double> out(model.horizon), d_out(model.horizon);
    const double scale = 1.0 / static_cast<double>(windows.size() * model.horizon);
    double loss = 0.0;
    for (std::size_t w = 0; w < windows.size(); ++w) {
        const auto& win = windows[w];
        std::span<const double> mask = masks.empty() ? std::span<const double>{} : std::span<const double>(masks[w]);
        detail::forward_trace(model, win.input, mask, tr, out);
        for (std::size_t r = 0; r < model.horizon; ++r) {
            const double e = out[r] - win.target[r];
            loss += e * e * scale;
            d_out[r] = 2.0 * e * scale;
        }
        if (!grad.empty()) detail::backward_trace(model, win.input, mask, tr, d_out, grad);
    }
    return loss;
}

inline double evaluate_loss(const ForecastModel& model, std::span<const SupervisedWindow> windows) {
    return loss_and_gradient(model, windows, {});
}

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

struct TrainOptions {
    std::size_t epochs = 50;
    std::size_t batch_size = 32;
    std::size_t patience = 5; // epochs without validation improvement before stopping
};

namespace detail {

/// Adam with (0.9, 0.999) moment decay; moments start at zero on each call.
class Adam {
public:
    Adam(std::size_t n, double lr) : lr_(lr), m_(n, 0.0), v_(n, 0.0) {}

    void step(std::span<double> params, std::span<const double> grad) {
        ++t_;
        const double c1 = 1.0 - std::pow(kBeta1, static_cast<double>(t_));
        const double c2 = 1.0 - std::pow(kBeta2, static_cast<double>(t_));
        for (std::size_t k = 0; k < params.size(); ++k) {
            m_[k] = kBeta1 * m_[k] + (1.0 - kBeta1) * grad[k];
            v_[k] = kBeta2 * v_[k] + (1.0 - kBeta2) * grad[k] * grad[k];
            params[k] -= lr_ * (m_[k] / c1) / (std::sqrt(v_[k] / c2) + kEps);
        }
    }

private:
    static constexpr double kBeta1 = 0.9, kBeta2 = 0.999, kEps = 1e-8;
    double lr_;
    std::uint64_t t_ = 0;
    std::vector<double> m_, v_;
};

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (salt + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

inline ForecastModel fit(ForecastModel model, std::span<const SupervisedWindow> windows,
                         std::span<const SupervisedWindow> val_windows, const TrainOptions& opts) {
    const std::size_t n = windows.size();
    const std::size_t H = model.hyperparameters.n_units;
    const double keep = 1.0 - model.hyperparameters.dropout_rate;
    std::mt19937_64 rng(mix_seed(model.rng_seed, model.version));
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    Adam adam(model.params.size(), model.hyperparameters.learning_rate);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<double> grad(model.params.size());
    std::vector<SupervisedWindow> batch;
    std::vector<std::vector<double>> masks;

    ForecastModel best = model;
    double best_val = std::numeric_limits<double>::infinity();
    std::size_t stale = 0;
    const bool validate = !val_windows.empty();

    for (std::size_t epoch = 0; epoch < opts.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < n; start += opts.batch_size) {
            const std::size_t end = std::min(n, start + opts.batch_size);
            batch.clear();
            masks.clear();
            for (std::size_t k = start; k < end; ++k) {
                batch.push_back(windows[order[k]]);
                if (model.hyperparameters.dropout_rate > 0.0) {
                    std::vector<double> mask(H);
                    for (double& v : mask) v = unit(rng) < keep ? 1.0 / keep : 0.0;
                    masks.push_back(std::move(mask));
                }
            }
            const double loss = loss_and_gradient(model, batch, grad, masks);
            if (!std::isfinite(loss)) throw Error(ErrorCode::DivergedLoss, "epoch " + std::to_string(epoch));
            adam.step(model.params, grad);
        }
        if (validate) {
            const double val = evaluate_loss(model, val_windows);
            if (!std::isfinite(val)) throw Error(ErrorCode::DivergedLoss, "validation, epoch " + std::to_string(epoch));
            if (val < best_val) {
                best_val = val;
                best = model;
                stale = 0;
            } else if (++stale >= opts.patience) {
                break;
            }
        }
    }
    return validate ? best : model;
}

} // namespace detail

/// Mini-batch Adam on MSE. With validation windows the returned weights are those of the
/// epoch with the lowest validation loss, and training stops after `patience` stale epochs.
inline ForecastModel train(const ForecastModel& model, std::span<const SupervisedWindow> windows,
                           std::span<const SupervisedWindow> val_windows, const TrainOptions& opts = {}) {
    if (windows.empty()) throw Error(ErrorCode::EmptyTrainingSet, "no training windows");
    return detail::fit(model, windows, val_windows, opts);
}

/// Continues training from the stored weights on `new_windows` only, using the tuned
/// learning and dropout rates. The unit count is structural and never changes here.
/// An empty batch returns the model unchanged.
inline ForecastModel incremental_update(const ForecastModel& model, std::span<const SupervisedWindow> new_windows,
                                        const Hyperparameters& tuned, std::size_t epochs = 10,
                                        std::size_t batch_size = 32) {
    if (new_windows.empty()) return model;
    ForecastModel next = model;
    next.hyperparameters.learning_rate = tuned.learning_rate;
    next.hyperparameters.dropout_rate = tuned.dropout_rate;
    next.version = model.version + 1;
    return detail::fit(std::move(next), new_windows, {}, {epochs, batch_size, 0});
}

// ---------------------------------------------------------------------------
// Day-level forecasting
// ---------------------------------------------------------------------------

using DayForecast = std::vector<std::vector<double>>; // 24 hours x steps per hour

/// Forecasts each hour of `day` from the `input_len` readings preceding that hour.
/// `context` holds the readings immediately before the day.
inline DayForecast predict_day(const ForecastModel& model, std::span<const double> context, const DaySample& day) {
    const std::size_t per_hour = day.readings.size() / 24;
    if (day.readings.size() % 24 != 0 || per_hour != model.horizon)
        throw Error(ErrorCode::InvalidResolution, "an hour must span exactly the model horizon");
    if (context.size() < model.input_len)
        throw Error(ErrorCode::InsufficientContext, std::to_string(context.size()) + " context readings");

    std::vector<double> history(context.end() - static_cast<std::ptrdiff_t>(model.input_len), context.end());
    history.insert(history.end(), day.readings.begin(), day.readings.end());
    DayForecast out;
    out.reserve(24);
    std::vector<double> input(model.input_len);
    for (std::size_t hour = 0; hour < 24; ++hour) {
        const std::size_t end = model.input_len + hour * per_hour; // first reading of this hour
        for (std::size_t k = 0; k < model.input_len; ++k)
            input[k] = model.norm.normalize(history[end - model.input_len + k]);
        auto pred = lstm_forward(model, input);
        for (double& v : pred) v = model.norm.denormalize(v);
        out.push_back(std::move(pred));
    }
    return out;
}

/// Each hour repeats the same hour of the previous day.
inline DayForecast seasonal_naive(std::span<const double> context, std::size_t readings_per_day = 144) {
    if (readings_per_day == 0 || readings_per_day % 24 != 0)
        throw Error(ErrorCode::InvalidResolution, "readings per day must be a multiple of 24");
    if (context.size() < readings_per_day)
        throw Error(ErrorCode::InsufficientContext, std::to_string(context.size()) + " context readings");
    const std::size_t per_hour = readings_per_day / 24;
    const auto prev = context.subspan(context.size() - readings_per_day);
    DayForecast out;
    for (std::size_t hour = 0; hour < 24; ++hour)
        out.emplace_back(prev.begin() + static_cast<std::ptrdiff_t>(hour * per_hour),
                         prev.begin() + static_cast<std::ptrdiff_t>((hour + 1) * per_hour));
    return out;
}

// ---------------------------------------------------------------------------
// Checkpoints
// ---------------------------------------------------------------------------

inline constexpr int kCheckpointFormat = 1;

inline nlohmann::ordered_json to_json(const ForecastModel& m) {
    nlohmann::ordered_json j;
    j["format"] = "dalstm-checkpoint";
    j["format_version"] = kCheckpointFormat;
    j["hyperparameters"] = {{"learning_rate", m.hyperparameters.learning_rate},
                            {"dropout_rate", m.hyperparameters.dropout_rate},
                            {"n_units", m.hyperparameters.n_units}};
    j["input_len"] = m.input_len;
    j["horizon"] = m.horizon;
    j["norm_stats"] = {{"min", m.norm.min}, {"max", m.norm.max}};
    j["rng_seed"] = m.rng_seed;
    j["version"] = m.version;
    auto& tensors = j["tensors"];
    for (std::size_t k = 0; k < kTensorNames.size(); ++k) {
        const auto t = m.tensor(static_cast<Tensor>(k));
        tensors[std::string(kTensorNames[k])] = std::vector<double>(t.begin(), t.end());
    }
    return j;
}

inline ForecastModel model_from_json(const nlohmann::json& j) {
    try {
        if (j.at("format") != "dalstm-checkpoint" || j.at("format_version") != kCheckpointFormat)
            throw Error(ErrorCode::BadCheckpoint, "unknown checkpoint format");
        ForecastModel m;
        const auto& hp = j.at("hyperparameters");
        m.hyperparameters = {hp.at("learning_rate").get<double>(), hp.at("dropout_rate").get<double>(),
                             hp.at("n_units").get<std::size_t>()};
        m.input_len = j.at("input_len").get<std::size_t>();
        m.horizon = j.at("horizon").get<std::size_t>();
        m.norm = {j.at("norm_stats").at("min").get<double>(), j.at("norm_stats").at("max").get<double>()};
        m.rng_seed = j.at("rng_seed").get<std::uint64_t>();
        m.version = j.at("version").get<std::uint64_t>();
        m.params.resize(m.layout().total);
        for (std::size_t k = 0; k < kTensorNames.size(); ++k) {
            const auto values = j.at("tensors").at(std::string(kTensorNames[k])).get<std::vector<double>>();
            auto t = m.tensor(static_cast<Tensor>(k));
            if (values.size() != t.size())
                throw Error(ErrorCode::BadCheckpoint, "tensor " + std::string(kTensorNames[k]) + " has wrong size");
            std::copy(values.begin(), values.end(), t.begin());
        }
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::BadCheckpoint, e.what());
    }
}

inline void save_checkpoint(const std::string& path, const ForecastModel& m) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
    out << to_json(m).dump() << '\n';
}

inline ForecastModel load_checkpoint(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
    try {
        return model_from_json(nlohmann::json::parse(in));
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::BadCheckpoint, e.what());
    }
}

} // namespace dalstm
