#pragma once

#include "dalstm/drift.hpp"
#include "dalstm/error.hpp"
#include "dalstm/eval.hpp"
#include "dalstm/forecaster.hpp"
#include "dalstm/hpo.hpp"
#include "dalstm/ingest.hpp"

#include <nlohmann/json.hpp>

#include <chrono>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace dalstm {

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

enum class DurationModel { WallClock, Synthetic };

struct RunConfig {
    RunMode mode = RunMode::Baseline;
    std::optional<double> tau;
    std::uint64_t seed = 0;

    DriftConfig drift;
    SplitSpec split;
    int utc_offset_minutes = 0;
    std::size_t max_gap = 6;

    std::size_t hpo_budget_initial = 15;
    std::size_t hpo_budget_adaptation = 8;
    std::size_t hpo_n_init = 5;
    SearchSpace search_space;

    std::size_t epochs_initial = 50;
    std::size_t epochs_incremental = 10;
    std::size_t patience = 5;
    std::size_t batch_size = 32;
    std::size_t train_stride = 1;

    double price_rate = 0.027; // currency per minute
    DurationModel duration_model = DurationModel::WallClock;
    double seconds_per_window_epoch = 1e-3; // synthetic duration model constant

    bool retune_units_full_retrain = false;
    MapeOptions mape;
};

inline void validate(const RunConfig& c) {
    auto fail = [](const std::string& what) { throw Error(ErrorCode::InvalidConfig, what); };
    if (c.mode == RunMode::Active && !c.tau) fail("active mode requires tau");
    if (c.mode != RunMode::Active && c.tau) fail("tau is only meaningful in active mode");
    if (c.tau && !(*c.tau >= 0.0 && *c.tau <= 1.0)) fail("tau must lie in [0, 1]");
    if (c.hpo_budget_initial < 1 || c.hpo_budget_adaptation < 1) fail("HPO budgets must be at least 1");
    if (c.epochs_initial < 1 || c.epochs_incremental < 1) fail("epoch counts must be at least 1");
    if (c.batch_size < 1 || c.train_stride < 1) fail("batch size and stride must be at least 1");
    if (!(c.drift.load_bandwidth > 0.0)) fail("load_bandwidth must be positive");
    if (!(c.price_rate >= 0.0)) fail("price_rate must be non-negative");
    if (c.search_space.learning_rates.empty() || c.search_space.dropout_rates.empty() ||
        c.search_space.n_units.empty())
        fail("search space dimensions must be non-empty");
    for (double d : c.search_space.dropout_rates)
        if (!(d >= 0.0 && d < 1.0)) fail("dropout rates must lie in [0, 1)");
}

namespace detail {

template <class T>
void read_if(const nlohmann::json& j, const char* key, T& out) {
    if (j.contains(key)) out = j.at(key).get<T>();
}

inline void reject_unknown(const nlohmann::json& j, std::initializer_list<const char*> known, const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* k : known) ok = ok || it.key() == k;
        if (!ok) throw Error(ErrorCode::InvalidConfig, "unknown key '" + it.key() + "' in " + where);
    }
}

} // namespace detail

/// Reads a run configuration document. Absent keys keep their defaults; unknown keys are rejected.
inline RunConfig config_from_json(const nlohmann::json& j) {
    RunConfig c;
    try {
        detail::reject_unknown(j,
                               {"mode", "tau", "seed", "load_bandwidth", "grid_points", "history_grid_points",
                                "pvalue_rank_fallback", "train_fraction", "validation_fraction_of_train",
                                "utc_offset_minutes", "max_gap", "hpo", "epochs", "train_stride", "price_rate",
                                "duration_model", "retune_units_full_retrain", "mape_exclude_zero", "synthetic"},
                               "config");
        if (j.contains("mode")) c.mode = run_mode_from_string(j.at("mode").get<std::string>());
        if (j.contains("tau") && !j.at("tau").is_null()) c.tau = j.at("tau").get<double>();
        detail::read_if(j, "seed", c.seed);
        detail::read_if(j, "load_bandwidth", c.drift.load_bandwidth);
        detail::read_if(j, "grid_points", c.drift.grid_points);
        detail::read_if(j, "history_grid_points", c.drift.history_grid_points);
        detail::read_if(j, "pvalue_rank_fallback", c.drift.rank_fallback);
        detail::read_if(j, "train_fraction", c.split.train_fraction);
        detail::read_if(j, "validation_fraction_of_train", c.split.validation_fraction_of_train);
        detail::read_if(j, "utc_offset_minutes", c.utc_offset_minutes);
        detail::read_if(j, "max_gap", c.max_gap);
        if (j.contains("hpo")) {
            const auto& h = j.at("hpo");
            detail::reject_unknown(h, {"initial_budget", "adaptation_budget", "n_init", "learning_rates",
                                       "dropout_rates", "n_units"},
                                   "hpo");
            detail::read_if(h, "initial_budget", c.hpo_budget_initial);
            detail::read_if(h, "adaptation_budget", c.hpo_budget_adaptation);
            detail::read_if(h, "n_init", c.hpo_n_init);
            detail::read_if(h, "learning_rates", c.search_space.learning_rates);
            detail::read_if(h, "dropout_rates", c.search_space.dropout_rates);
            detail::read_if(h, "n_units", c.search_space.n_units);
        }
        if (j.contains("epochs")) {
            const auto& e = j.at("epochs");
            detail::reject_unknown(e, {"initial", "incremental", "patience", "batch_size"}, "epochs");
            detail::read_if(e, "initial", c.epochs_initial);
            detail::read_if(e, "incremental", c.epochs_incremental);
            detail::read_if(e, "patience", c.patience);
            detail::read_if(e, "batch_size", c.batch_size);
        }
        detail::read_if(j, "train_stride", c.train_stride);
        detail::read_if(j, "price_rate", c.price_rate);
        if (j.contains("duration_model")) {
            const auto& d = j.at("duration_model");
            detail::reject_unknown(d, {"kind", "seconds_per_window_epoch"}, "duration_model");
            const auto kind = d.value("kind", std::string("wall_clock"));
            if (kind == "wall_clock") c.duration_model = DurationModel::WallClock;
            else if (kind == "synthetic") c.duration_model = DurationModel::Synthetic;
            else throw Error(ErrorCode::InvalidConfig, "unknown duration model '" + kind + "'");
            detail::read_if(d, "seconds_per_window_epoch", c.seconds_per_window_epoch);
        }
        detail::read_if(j, "retune_units_full_retrain", c.retune_units_full_retrain);
        detail::read_if(j, "mape_exclude_zero", c.mape.exclude_zero);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, e.what());
    }
    return c;
}

inline nlohmann::json read_json_file(const std::string& path, ErrorCode on_error) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
    try {
        return nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(on_error, path + ": " + e.what());
    }
}

inline RunConfig load_config(const std::string& path) {
    return config_from_json(read_json_file(path, ErrorCode::InvalidConfig));
}

/// Synthetic-generator parameters, read from the `synthetic` section of a config document
/// (or from a bare document holding the same keys).
inline SyntheticSpec synthetic_from_json(const nlohmann::json& doc) {
    const auto& j = doc.contains("synthetic") ? doc.at("synthetic") : doc;
    SyntheticSpec s;
    try {
        if (j.contains("profile")) {
            const auto& p = j.at("profile");
            detail::reject_unknown(p, {"base_kwh", "morning_peak_kwh", "morning_hour", "evening_peak_kwh",
                                       "evening_hour", "peak_width_hours"},
                                   "profile");
            detail::read_if(p, "base_kwh", s.profile.base_kwh);
            detail::read_if(p, "morning_peak_kwh", s.profile.morning_peak_kwh);
            detail::read_if(p, "morning_hour", s.profile.morning_hour);
            detail::read_if(p, "evening_peak_kwh", s.profile.evening_peak_kwh);
            detail::read_if(p, "evening_hour", s.profile.evening_hour);
            detail::read_if(p, "peak_width_hours", s.profile.peak_width_hours);
        }
        if (j.contains("drift_events")) {
            for (const auto& e : j.at("drift_events")) {
                DriftEvent ev;
                ev.day = e.at("day").get<std::int64_t>();
                ev.magnitude = e.at("magnitude").get<double>();
                const auto kind = e.at("kind").get<std::string>();
                if (kind == "mean_shift") ev.kind = DriftKind::MeanShift;
                else if (kind == "scale_shift") ev.kind = DriftKind::ScaleShift;
                else if (kind == "shape_swap") ev.kind = DriftKind::ShapeSwap;
                else throw Error(ErrorCode::InvalidConfig, "unknown drift kind '" + kind + "'");
                s.drift_events.push_back(ev);
            }
        }
        detail::read_if(j, "noise_sd", s.noise_sd);
        detail::read_if(j, "seed", s.seed);
        detail::read_if(j, "n_days", s.n_days);
        detail::read_if(j, "resolution_s", s.resolution_s);
        if (j.contains("start_time")) {
            if (!parse_iso8601(j.at("start_time").get<std::string>(), s.start_time))
                throw Error(ErrorCode::InvalidConfig, "start_time is not ISO-8601");
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, e.what());
    }
    return s;
}

// ---------------------------------------------------------------------------
// Data preparation
// ---------------------------------------------------------------------------

/// FNV-1a over timestamps and values; identifies the input of a run.
inline std::string series_hash(const LoadSeries& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    auto feed = [&](const void* p, std::size_t n) {
        const auto* b = static_cast<const unsigned char*>(p);
        for (std::size_t k = 0; k < n; ++k) h = (h ^ b[k]) * 0x100000001b3ULL;
    };
    for (std::size_t k = 0; k < s.size(); ++k) {
        feed(&s.timestamps[k], sizeof(std::int64_t));
        feed(&s.values[k], sizeof(double));
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

struct PreparedData {
    std::string hash;
    SegmentationReport segmentation;
    DatasetSplit split;
    std::size_t readings_per_day = 0;
};

inline PreparedData prepare(const RunConfig& config, const LoadSeries& raw) {
    PreparedData d;
    d.hash = series_hash(raw);
    const auto series = raw.is_regular() ? raw : resample_and_fill(raw, config.max_gap);
    auto seg = segment_days(series, config.utc_offset_minutes);
    d.segmentation = seg.report;
    d.readings_per_day = series.readings_per_day();
    d.split = split_dataset(seg.days, config.split);
    return d;
}

// ---------------------------------------------------------------------------
// Runs
// ---------------------------------------------------------------------------

struct InitialModel {
    ForecastModel model;
    HpoEvent hpo;
    double duration_s = 0.0;
};

struct RunOutcome {
    EvaluationReport report;
    std::vector<DayForecast> forecasts; // one per test day
    ForecastModel final_model;
};

namespace detail {

/// Windows whose targets lie inside `days`, with inputs allowed to reach back into
/// `context` (readings immediately preceding the first day). Consecutive days are
/// assumed contiguous unless their day indices jump.
inline std::vector<SupervisedWindow> windows_for_days(const ForecastModel& model, std::span<const double> context,
                                                      std::span<const DaySample> days, std::size_t stride) {
    std::vector<SupervisedWindow> out;
    std::vector<double> block;
    auto flush = [&] {
        auto w = normalized_windows(model, block, stride);
        out.insert(out.end(), std::make_move_iterator(w.begin()), std::make_move_iterator(w.end()));
        block.clear();
    };
    const std::size_t lead = std::min(context.size(), model.input_len);
    block.assign(context.end() - static_cast<std::ptrdiff_t>(lead), context.end());
    for (std::size_t k = 0; k < days.size(); ++k) {
        if (k > 0 && days[k].day_index != days[k - 1].day_index + 1) flush();
        block.insert(block.end(), days[k].readings.begin(), days[k].readings.end());
    }
    flush();
    return out;
}

inline std::vector<double> concat_readings(std::span<const DaySample> days) {
    std::vector<double> out;
    for (const auto& d : days) out.insert(out.end(), d.readings.begin(), d.readings.end());
    return out;
}

/// MAPE of the model's forecasts on windows, in original units.
inline double window_mape(const ForecastModel& m, std::span<const SupervisedWindow> windows, const MapeOptions& opts) {
    double sum = 0.0;
    std::vector<double> actual(m.horizon);
    for (const auto& w : windows) {
        auto pred = lstm_forward(m, w.input);
        for (std::size_t k = 0; k < m.horizon; ++k) {
            pred[k] = m.norm.denormalize(pred[k]);
            actual[k] = m.norm.denormalize(w.target[k]);
        }
        sum += mape(actual, pred, opts);
    }
    return sum / static_cast<double>(windows.size());
}

/// Either measured wall-clock seconds or the synthetic c * epochs * windows.
class Stopwatch {
public:
    explicit Stopwatch(const RunConfig& c) : cfg_(c), t0_(std::chrono::steady_clock::now()) {}

    double seconds(std::size_t epochs, std::size_t windows) const {
        if (cfg_.duration_model == DurationModel::Synthetic)
            return cfg_.seconds_per_window_epoch * static_cast<double>(epochs) * static_cast<double>(windows);
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0_).count();
    }

private:
    const RunConfig& cfg_;
    std::chrono::steady_clock::time_point t0_;
};

// Large finite score for a trial whose training diverged.
inline constexpr double kDivergedScore = 1e9;

struct Adaptation {
    ForecastModel model;
    HpoEvent hpo;
    double hpo_seconds = 0.0;
    double update_seconds = 0.0;
};

/// Tunes learning/dropout rate on the day's windows (fit on the earlier part, score on the
/// most recent sixth), then continues training from the current weights on the whole day.
inline Adaptation adapt(const RunConfig& cfg, const ForecastModel& current, std::span<const SupervisedWindow> day_windows,
                        std::span<const SupervisedWindow> history_windows, std::int64_t day_index) {
    Adaptation a;
    a.model = current;
    a.hpo.day_index = day_index;
    a.hpo.selected = current.hyperparameters;
    if (day_windows.empty()) return a;

    const std::size_t n_score = std::max<std::size_t>(1, day_windows.size() / 6);
    const auto fit_part = day_windows.first(day_windows.size() - std::min(n_score, day_windows.size() - 1));
    const auto score_part = day_windows.last(std::min(n_score, day_windows.size()));

    SearchSpace space = cfg.search_space;
    if (!cfg.retune_units_full_retrain) space = freeze_structure(space, current.hyperparameters.n_units);
    std::optional<ForecastModel> retrained;
    auto objective = [&](const Hyperparameters& hp) -> TrialOutcome {
        Stopwatch sw(cfg);
        try {
            if (hp.n_units == current.hyperparameters.n_units) {
                const auto cand = incremental_update(current, fit_part, hp, cfg.epochs_incremental, cfg.batch_size);
                return {window_mape(cand, score_part, cfg.mape), sw.seconds(cfg.epochs_incremental, fit_part.size())};
            }
            // structural change: retrain from scratch on everything seen so far
            auto fresh = make_model(hp, current.norm, cfg.seed, current.input_len, current.horizon);
            fresh = train(fresh, history_windows, {}, {cfg.epochs_initial, cfg.batch_size, cfg.patience});
            const double score = window_mape(fresh, score_part, cfg.mape);
            return {score, sw.seconds(cfg.epochs_initial, history_windows.size())};
        } catch (const Error& e) {
            if (e.code() != ErrorCode::DivergedLoss) throw;
            return {kDivergedScore, sw.seconds(cfg.epochs_incremental, fit_part.size())};
        }
    };
    const auto result = optimize(objective, space, cfg.hpo_budget_adaptation, mix_seed(cfg.seed, static_cast<std::uint64_t>(day_index)),
                                 {cfg.hpo_n_init, 0.01});
    a.hpo.trials = result.history;
    a.hpo.selected = result.best;
    for (const auto& t : result.history) a.hpo_seconds += t.duration_s;

    Stopwatch sw(cfg);
    if (result.best.n_units == current.hyperparameters.n_units) {
        a.model = incremental_update(current, day_windows, result.best, cfg.epochs_incremental, cfg.batch_size);
        a.update_seconds = sw.seconds(cfg.epochs_incremental, day_windows.size());
    } else {
        auto fresh = make_model(result.best, current.norm, cfg.seed, current.input_len, current.horizon);
        fresh = train(fresh, history_windows, {}, {cfg.epochs_initial, cfg.batch_size, cfg.patience});
        fresh = incremental_update(fresh, day_windows, result.best, cfg.epochs_incremental, cfg.batch_size);
        fresh.version = current.version + 1;
        a.model = std::move(fresh);
        a.update_seconds = sw.seconds(cfg.epochs_initial + cfg.epochs_incremental,
                                      history_windows.size() + day_windows.size());
    }
    return a;
}

} // namespace detail

/// Full HPO over the search space on the training split, scored by validation MAPE.
/// The winning trial's trained network becomes the deployed model.
inline InitialModel train_initial(const RunConfig& cfg, const PreparedData& data) {
    const auto& split = data.split;
    const auto train_readings = detail::concat_readings(split.train);
    const NormStats norm = NormStats::fit(train_readings);
    const ForecastModel shape_probe = make_model({0.001, 0.0, 1}, norm, cfg.seed);
    const auto train_windows = detail::windows_for_days(shape_probe, {}, split.train, cfg.train_stride);
    const auto val_windows = detail::windows_for_days(shape_probe, train_readings, split.validation, 1);
    if (train_windows.empty()) throw Error(ErrorCode::EmptyTrainingSet, "training split yields no windows");
    if (val_windows.empty()) throw Error(ErrorCode::EmptyTrainingSet, "validation split yields no windows");

    std::optional<ForecastModel> best_model;
    double best_score = std::numeric_limits<double>::infinity();
    auto objective = [&](const Hyperparameters& hp) -> TrialOutcome {
        detail::Stopwatch sw(cfg);
        double score = detail::kDivergedScore;
        try {
            auto m = train(make_model(hp, norm, cfg.seed), train_windows, val_windows,
                           {cfg.epochs_initial, cfg.batch_size, cfg.patience});
            score = detail::window_mape(m, val_windows, cfg.mape);
            if (score < best_score) best_score = score, best_model = std::move(m);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::DivergedLoss) throw;
        }
        return {score, sw.seconds(cfg.epochs_initial, train_windows.size())};
    };
    const auto result = optimize(objective, cfg.search_space, cfg.hpo_budget_initial, cfg.seed, {cfg.hpo_n_init, 0.01});
    if (!best_model) throw Error(ErrorCode::DivergedLoss, "every initial HPO trial diverged");

    InitialModel init;
    init.model = std::move(*best_model);
    init.hpo.day_index = split.validation.back().day_index;
    init.hpo.selected = result.best;
    init.hpo.trials = result.history;
    for (const auto& t : result.history) init.duration_s += t.duration_s;
    return init;
}

/// Walks the test days in order. Each day is forecast with the current model, scored, and
/// then (passive: always; active: when the detector flags it) used to adapt the model.
inline RunOutcome run_prepared(const RunConfig& cfg, const PreparedData& data, const InitialModel& initial) {
    validate(cfg);
    const auto& split = data.split;
    RunOutcome out;
    auto& rep = out.report;
    rep.mode = cfg.mode;
    rep.tau = cfg.tau;
    rep.series_hash = data.hash;
    rep.train_days = split.train.size();
    rep.validation_days = split.validation.size();
    rep.test_days = split.test.size();
    rep.cost_ledger.price_rate = cfg.price_rate;
    rep.cost_ledger = record_cost(std::move(rep.cost_ledger), initial.hpo.day_index, CostKind::InitialTraining,
                                  initial.duration_s);
    rep.hpo_events.push_back(initial.hpo);

    std::vector<DaySample> seen(split.train);
    seen.insert(seen.end(), split.validation.begin(), split.validation.end());
    std::vector<double> context = detail::concat_readings(seen);

    std::optional<DriftState> state;
    if (cfg.mode == RunMode::Active) state = init_drift_state(seen, cfg.drift);

    ForecastModel model = initial.model;
    for (const auto& day : split.test) {
        const auto forecast = predict_day(model, context, day);
        rep.daily_errors.push_back(daily_error(day.day_index, hourly_blocks(day.readings), forecast, cfg.mape));
        out.forecasts.push_back(forecast);

        bool should_adapt = cfg.mode == RunMode::Passive;
        if (state) {
            const auto decision = decide(*state, day, *cfg.tau);
            *state = advance(std::move(*state), day, decision.divergence);
            rep.drift_decisions.push_back(decision);
            should_adapt = decision.is_drift;
        }

        if (should_adapt) {
            const auto day_windows =
                detail::windows_for_days(model, context, std::span<const DaySample>(&day, 1), 1);
            std::vector<SupervisedWindow> history_windows;
            if (cfg.retune_units_full_retrain) {
                seen.push_back(day);
                history_windows = detail::windows_for_days(model, {}, seen, cfg.train_stride);
                seen.pop_back();
            }
            auto a = detail::adapt(cfg, model, day_windows, history_windows, day.day_index);
            rep.cost_ledger = record_cost(std::move(rep.cost_ledger), day.day_index, CostKind::Hpo, a.hpo_seconds);
            rep.cost_ledger =
                record_cost(std::move(rep.cost_ledger), day.day_index, CostKind::Adaptation, a.update_seconds);
            rep.hpo_events.push_back(std::move(a.hpo));
            model = std::move(a.model);
            ++rep.adaptation_count;
        }
        seen.push_back(day);
        context.insert(context.end(), day.readings.begin(), day.readings.end());
    }
    rep.finalize();
    out.final_model = std::move(model);
    return out;
}

inline RunOutcome run(const RunConfig& cfg, const LoadSeries& series) {
    validate(cfg);
    const auto data = prepare(cfg, series);
    return run_prepared(cfg, data, train_initial(cfg, data));
}

inline EvaluationReport run_baseline(RunConfig cfg, const LoadSeries& series) {
    cfg.mode = RunMode::Baseline;
    cfg.tau.reset();
    return run(cfg, series).report;
}

inline EvaluationReport run_passive(RunConfig cfg, const LoadSeries& series) {
    cfg.mode = RunMode::Passive;
    cfg.tau.reset();
    return run(cfg, series).report;
}

inline EvaluationReport run_active(RunConfig cfg, const LoadSeries& series, double tau) {
    cfg.mode = RunMode::Active;
    cfg.tau = tau;
    return run(cfg, series).report;
}

// ---------------------------------------------------------------------------
// Comparison
// ---------------------------------------------------------------------------

struct ComparisonRow {
    std::string label;
    double mean_mape = 0.0, std_mape = 0.0, mean_rmse = 0.0, std_rmse = 0.0;
    double improvement_mape = 0.0, improvement_rmse = 0.0;
    std::size_t adaptation_count = 0;
    double total_cost = 0.0;
    double adaptation_cost = 0.0;
    std::optional<double> trade_off_score;
};

struct Comparison {
    std::string series_hash;
    ComparisonRow baseline;
    std::vector<ComparisonRow> candidates;
};

inline std::string run_label(const EvaluationReport& r) {
    if (r.mode != RunMode::Active || !r.tau) return std::string(to_string(r.mode));
    std::ostringstream os;
    os << "active(tau=" << *r.tau << ")";
    return os.str();
}

/// Trade-off score of a candidate: MAPE improvement per unit of post-deployment cost. A run
/// that never adapted costs nothing and, having changed nothing, scores 0.
inline std::optional<double> comparison_trade_off(double improvement_percent, double adaptation_cost) {
    if (adaptation_cost > 0.0) return trade_off_score(improvement_percent, adaptation_cost);
    if (improvement_percent == 0.0) return 0.0;
    return std::nullopt;
}

inline Comparison compare(const EvaluationReport& baseline, const std::vector<EvaluationReport>& candidates) {
    Comparison cmp;
    cmp.series_hash = baseline.series_hash;
    auto row = [&](const EvaluationReport& r) {
        ComparisonRow row;
        row.label = run_label(r);
        row.mean_mape = r.mean_mape, row.std_mape = r.std_mape;
        row.mean_rmse = r.mean_rmse, row.std_rmse = r.std_rmse;
        row.improvement_mape = improvement(r.mean_mape, baseline.mean_mape);
        row.improvement_rmse = improvement(r.mean_rmse, baseline.mean_rmse);
        row.adaptation_count = r.adaptation_count;
        row.total_cost = r.total_cost;
        row.adaptation_cost = r.adaptation_cost;
        row.trade_off_score = comparison_trade_off(row.improvement_mape, r.adaptation_cost);
        return row;
    };
    for (const auto& c : candidates) {
        if (c.series_hash != baseline.series_hash)
            throw Error(ErrorCode::MismatchedRuns, "series hash " + c.series_hash + " != " + baseline.series_hash);
        if (c.train_days != baseline.train_days || c.validation_days != baseline.validation_days ||
            c.test_days != baseline.test_days)
            throw Error(ErrorCode::MismatchedRuns, "reports use different splits");
    }
    cmp.baseline = row(baseline);
    for (const auto& c : candidates) cmp.candidates.push_back(row(c));
    return cmp;
}

inline nlohmann::ordered_json to_json(const Comparison& cmp) {
    auto row = [](const ComparisonRow& r) {
        nlohmann::ordered_json j;
        j["label"] = r.label;
        j["mean_mape"] = r.mean_mape;
        j["std_mape"] = r.std_mape;
        j["mean_rmse"] = r.mean_rmse;
        j["std_rmse"] = r.std_rmse;
        j["improvement_mape"] = r.improvement_mape;
        j["improvement_rmse"] = r.improvement_rmse;
        j["adaptation_count"] = r.adaptation_count;
        j["total_cost"] = r.total_cost;
        j["adaptation_cost"] = r.adaptation_cost;
        j["trade_off_score"] = detail::optional_json(r.trade_off_score);
        return j;
    };
    nlohmann::ordered_json j;
    j["series_hash"] = cmp.series_hash;
    j["baseline"] = row(cmp.baseline);
    auto& c = j["candidates"] = nlohmann::ordered_json::array();
    for (const auto& r : cmp.candidates) c.push_back(row(r));
    return j;
}

inline std::string render_table(const Comparison& cmp) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(2);
    os << std::left << std::setw(20) << "run" << std::right << std::setw(9) << "MAPE" << std::setw(8) << "std"
       << std::setw(9) << "Imp%" << std::setw(9) << "RMSE" << std::setw(8) << "std" << std::setw(9) << "Imp%"
       << std::setw(7) << "adapt" << std::setw(10) << "cost" << std::setw(9) << "TS" << '\n';
    auto line = [&](const ComparisonRow& r) {
        os << std::left << std::setw(20) << r.label << std::right << std::setw(9) << r.mean_mape << std::setw(8)
           << r.std_mape << std::setw(9) << r.improvement_mape << std::setw(9) << r.mean_rmse << std::setw(8)
           << r.std_rmse << std::setw(9) << r.improvement_rmse << std::setw(7) << r.adaptation_count
           << std::setw(10) << r.adaptation_cost << std::setw(9);
        if (r.trade_off_score) os << *r.trade_off_score;
        else os << "-";
        os << '\n';
    };
    line(cmp.baseline);
    for (const auto& r : cmp.candidates) line(r);
    return os.str();
}

} // namespace dalstm
