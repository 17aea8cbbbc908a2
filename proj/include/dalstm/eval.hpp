#pragma once

#include "dalstm/drift.hpp"
#include "dalstm/error.hpp"
#include "dalstm/hpo.hpp"
#include "dalstm/ingest.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <cstdint>
#include <iomanip>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

namespace dalstm {

// ---------------------------------------------------------------------------
// Error metrics
// ---------------------------------------------------------------------------

struct MapeOptions {
    double epsilon_zero = 1e-6; // kWh; actuals at or below this are treated as zero
    bool exclude_zero = false;  // skip zero actuals instead of failing
};

/// Mean absolute percentage error, (100/n) sum |(A - F) / A|.
inline double mape(std::span<const double> actual, std::span<const double> forecast, const MapeOptions& opts = {}) {
    if (actual.size() != forecast.size() || actual.empty())
        throw Error(ErrorCode::LengthMismatch,
                    std::to_string(actual.size()) + " actuals vs " + std::to_string(forecast.size()) + " forecasts");
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t k = 0; k < actual.size(); ++k) {
        if (std::abs(actual[k]) <= opts.epsilon_zero) {
            if (!opts.exclude_zero) throw Error(ErrorCode::ZeroActual, "actual value at position " + std::to_string(k));
            continue;
        }
        sum += std::abs((actual[k] - forecast[k]) / actual[k]);
        ++n;
    }
    if (n == 0) throw Error(ErrorCode::ZeroActual, "every actual value is zero");
    return 100.0 * sum / static_cast<double>(n);
}

inline double rmse(std::span<const double> actual, std::span<const double> forecast) {
    if (actual.size() != forecast.size() || actual.empty())
        throw Error(ErrorCode::LengthMismatch,
                    std::to_string(actual.size()) + " actuals vs " + std::to_string(forecast.size()) + " forecasts");
    double ss = 0.0;
    for (std::size_t k = 0; k < actual.size(); ++k) ss += (actual[k] - forecast[k]) * (actual[k] - forecast[k]);
    return std::sqrt(ss / static_cast<double>(actual.size()));
}

struct DailyError {
    std::int64_t day_index = 0;
    double mape = 0.0; // percent
    double rmse = 0.0; // kWh
};

/// Scores each of the 24 hourly forecasts separately, then averages the hourly figures.
inline DailyError daily_error(std::int64_t day_index, const std::vector<std::vector<double>>& actual,
                              const std::vector<std::vector<double>>& forecast, const MapeOptions& opts = {}) {
    if (actual.size() != 24 || forecast.size() != 24)
        throw Error(ErrorCode::WrongCount, std::to_string(actual.size()) + " hourly actuals, " +
                                               std::to_string(forecast.size()) + " hourly forecasts");
    DailyError e{day_index, 0.0, 0.0};
    for (std::size_t h = 0; h < 24; ++h) {
        e.mape += mape(actual[h], forecast[h], opts);
        e.rmse += rmse(actual[h], forecast[h]);
    }
    e.mape /= 24.0;
    e.rmse /= 24.0;
    return e;
}

/// Splits a day's readings into 24 equal hourly blocks.
inline std::vector<std::vector<double>> hourly_blocks(std::span<const double> readings) {
    if (readings.size() % 24 != 0) throw Error(ErrorCode::WrongCount, "day length is not a multiple of 24");
    const std::size_t per_hour = readings.size() / 24;
    std::vector<std::vector<double>> out;
    for (std::size_t h = 0; h < 24; ++h)
        out.emplace_back(readings.begin() + static_cast<std::ptrdiff_t>(h * per_hour),
                         readings.begin() + static_cast<std::ptrdiff_t>((h + 1) * per_hour));
    return out;
}

// ---------------------------------------------------------------------------
// Cost ledger
// ---------------------------------------------------------------------------

enum class CostKind { InitialTraining, Adaptation, Hpo };

inline std::string_view to_string(CostKind k) {
    switch (k) {
    case CostKind::InitialTraining: return "initial_training";
    case CostKind::Adaptation: return "adaptation";
    case CostKind::Hpo: return "hpo";
    }
    return "unknown";
}

inline CostKind cost_kind_from_string(std::string_view s) {
    if (s == "initial_training") return CostKind::InitialTraining;
    if (s == "adaptation") return CostKind::Adaptation;
    if (s == "hpo") return CostKind::Hpo;
    throw Error(ErrorCode::InvalidConfig, "unknown cost kind " + std::string(s));
}

struct CostEntry {
    std::int64_t day_index = 0;
    CostKind kind = CostKind::Adaptation;
    double duration_s = 0.0;
};

/// Compute time priced at `price_rate` currency units per minute.
struct CostLedger {
    std::vector<CostEntry> entries;
    double price_rate = 0.027;

    double cost_of(const CostEntry& e) const noexcept { return e.duration_s / 60.0 * price_rate; }

    double total() const noexcept {
        double t = 0.0;
        for (const auto& e : entries) t += cost_of(e);
        return t;
    }

    /// Cost incurred after deployment, i.e. everything but the initial training.
    double adaptation_total() const noexcept {
        double t = 0.0;
        for (const auto& e : entries)
            if (e.kind != CostKind::InitialTraining) t += cost_of(e);
        return t;
    }

    std::size_t count(CostKind kind) const noexcept {
        return static_cast<std::size_t>(
            std::count_if(entries.begin(), entries.end(), [kind](const CostEntry& e) { return e.kind == kind; }));
    }
};

inline CostLedger record_cost(CostLedger ledger, std::int64_t day_index, CostKind kind, double duration_s) {
    if (!(duration_s >= 0.0)) throw Error(ErrorCode::NegativeDuration, std::to_string(duration_s));
    ledger.entries.push_back({day_index, kind, duration_s});
    return ledger;
}

// ---------------------------------------------------------------------------
// Improvement and trade-off
// ---------------------------------------------------------------------------

/// Relative error reduction against the baseline, in percent.
inline double improvement(double candidate_mean_error, double baseline_mean_error) {
    if (!(baseline_mean_error > 0.0)) throw Error(ErrorCode::ZeroBaseline, std::to_string(baseline_mean_error));
    return 100.0 * (baseline_mean_error - candidate_mean_error) / baseline_mean_error;
}

/// Performance per unit cost.
inline double trade_off_score(double improvement_percent, double total_cost) {
    if (!(total_cost > 0.0)) throw Error(ErrorCode::ZeroCost, std::to_string(total_cost));
    return improvement_percent / total_cost;
}

struct MeanStd {
    double mean = 0.0;
    double std = 0.0; // population standard deviation
};

inline MeanStd mean_std(std::span<const double> xs) {
    if (xs.empty()) return {};
    double m = 0.0;
    for (double x : xs) m += x;
    m /= static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - m) * (x - m);
    return {m, std::sqrt(ss / static_cast<double>(xs.size()))};
}

// ---------------------------------------------------------------------------
// Report
// ---------------------------------------------------------------------------

inline constexpr int kReportSchemaVersion = 1;

enum class RunMode { Baseline, Passive, Active };

inline std::string_view to_string(RunMode m) {
    switch (m) {
    case RunMode::Baseline: return "baseline";
    case RunMode::Passive: return "passive";
    case RunMode::Active: return "active";
    }
    return "unknown";
}

inline RunMode run_mode_from_string(std::string_view s) {
    if (s == "baseline") return RunMode::Baseline;
    if (s == "passive") return RunMode::Passive;
    if (s == "active") return RunMode::Active;
    throw Error(ErrorCode::InvalidConfig, "unknown mode '" + std::string(s) + "'");
}

/// Hyperparameter search performed at one point of the run.
struct HpoEvent {
    std::int64_t day_index = 0;
    Hyperparameters selected;
    std::vector<TrialRecord> trials;
};

struct EvaluationReport {
    RunMode mode = RunMode::Baseline;
    std::optional<double> tau;
    std::string series_hash;
    std::size_t train_days = 0, validation_days = 0, test_days = 0;
    std::vector<DailyError> daily_errors;
    double mean_mape = 0.0, std_mape = 0.0, mean_rmse = 0.0, std_rmse = 0.0;
    std::vector<DriftDecision> drift_decisions;
    std::size_t adaptation_count = 0;
    CostLedger cost_ledger;
    double total_cost = 0.0;
    double adaptation_cost = 0.0;
    std::vector<HpoEvent> hpo_events;
    std::optional<double> improvement_vs_baseline;
    std::optional<double> trade_off_score;

    /// Recomputes every aggregate field from the per-day and ledger data.
    void finalize() {
        std::vector<double> m, r;
        for (const auto& e : daily_errors) m.push_back(e.mape), r.push_back(e.rmse);
        const auto ms = mean_std(m), rs = mean_std(r);
        mean_mape = ms.mean, std_mape = ms.std, mean_rmse = rs.mean, std_rmse = rs.std;
        total_cost = cost_ledger.total();
        adaptation_cost = cost_ledger.adaptation_total();
    }
};

namespace detail {

inline nlohmann::ordered_json hp_json(const Hyperparameters& hp) {
    return {{"learning_rate", hp.learning_rate}, {"dropout_rate", hp.dropout_rate}, {"n_units", hp.n_units}};
}

inline Hyperparameters hp_from_json(const nlohmann::json& j) {
    return {j.at("learning_rate").get<double>(), j.at("dropout_rate").get<double>(), j.at("n_units").get<std::size_t>()};
}

template <class T>
nlohmann::ordered_json optional_json(const std::optional<T>& v) {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

template <class T>
std::optional<T> optional_from(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || j.at(key).is_null()) return std::nullopt;
    return j.at(key).get<T>();
}

} // namespace detail

inline nlohmann::ordered_json to_json(const EvaluationReport& r) {
    using nlohmann::ordered_json;
    ordered_json j;
    j["schema_version"] = kReportSchemaVersion;
    j["mode"] = std::string(to_string(r.mode));
    j["tau"] = detail::optional_json(r.tau);
    j["series_hash"] = r.series_hash;
    j["split"] = {{"train_days", r.train_days}, {"validation_days", r.validation_days}, {"test_days", r.test_days}};
    auto& days = j["daily_errors"] = ordered_json::array();
    for (const auto& e : r.daily_errors) days.push_back({{"day_index", e.day_index}, {"mape", e.mape}, {"rmse", e.rmse}});
    j["mean_mape"] = r.mean_mape;
    j["std_mape"] = r.std_mape;
    j["mean_rmse"] = r.mean_rmse;
    j["std_rmse"] = r.std_rmse;
    auto& decisions = j["drift_decisions"] = ordered_json::array();
    for (const auto& d : r.drift_decisions)
        decisions.push_back({{"day_index", d.day_index},
                             {"divergence", d.divergence},
                             {"p_value", d.p_value},
                             {"is_drift", d.is_drift},
                             {"tau", d.tau}});
    j["adaptation_count"] = r.adaptation_count;
    auto& ledger = j["cost_ledger"];
    ledger["price_rate"] = r.cost_ledger.price_rate;
    auto& entries = ledger["entries"] = ordered_json::array();
    for (const auto& e : r.cost_ledger.entries)
        entries.push_back({{"day_index", e.day_index}, {"kind", std::string(to_string(e.kind))}, {"duration_s", e.duration_s}});
    j["total_cost"] = r.total_cost;
    j["adaptation_cost"] = r.adaptation_cost;
    auto& events = j["hpo_events"] = ordered_json::array();
    for (const auto& ev : r.hpo_events) {
        ordered_json e;
        e["day_index"] = ev.day_index;
        e["selected"] = detail::hp_json(ev.selected);
        auto& trials = e["trials"] = ordered_json::array();
        for (const auto& t : ev.trials) {
            auto tj = detail::hp_json(t.hyperparameters);
            tj["score"] = t.score;
            tj["duration_s"] = t.duration_s;
            trials.push_back(std::move(tj));
        }
        events.push_back(std::move(e));
    }
    j["improvement_vs_baseline"] = detail::optional_json(r.improvement_vs_baseline);
    j["trade_off_score"] = detail::optional_json(r.trade_off_score);
    return j;
}

inline EvaluationReport report_from_json(const nlohmann::json& j) {
    try {
        if (j.at("schema_version").get<int>() != kReportSchemaVersion)
            throw Error(ErrorCode::InvalidConfig, "unsupported report schema version");
        EvaluationReport r;
        r.mode = run_mode_from_string(j.at("mode").get<std::string>());
        r.tau = detail::optional_from<double>(j, "tau");
        r.series_hash = j.at("series_hash").get<std::string>();
        r.train_days = j.at("split").at("train_days").get<std::size_t>();
        r.validation_days = j.at("split").at("validation_days").get<std::size_t>();
        r.test_days = j.at("split").at("test_days").get<std::size_t>();
        for (const auto& e : j.at("daily_errors"))
            r.daily_errors.push_back(
                {e.at("day_index").get<std::int64_t>(), e.at("mape").get<double>(), e.at("rmse").get<double>()});
        r.mean_mape = j.at("mean_mape").get<double>();
        r.std_mape = j.at("std_mape").get<double>();
        r.mean_rmse = j.at("mean_rmse").get<double>();
        r.std_rmse = j.at("std_rmse").get<double>();
        for (const auto& d : j.at("drift_decisions"))
            r.drift_decisions.push_back({d.at("day_index").get<std::int64_t>(), d.at("divergence").get<double>(),
                                         d.at("p_value").get<double>(), d.at("is_drift").get<bool>(),
                                         d.at("tau").get<double>()});
        r.adaptation_count = j.at("adaptation_count").get<std::size_t>();
        r.cost_ledger.price_rate = j.at("cost_ledger").at("price_rate").get<double>();
        for (const auto& e : j.at("cost_ledger").at("entries"))
            r.cost_ledger.entries.push_back({e.at("day_index").get<std::int64_t>(),
                                             cost_kind_from_string(e.at("kind").get<std::string>()),
                                             e.at("duration_s").get<double>()});
        r.total_cost = j.at("total_cost").get<double>();
        r.adaptation_cost = j.at("adaptation_cost").get<double>();
        for (const auto& ev : j.at("hpo_events")) {
            HpoEvent e;
            e.day_index = ev.at("day_index").get<std::int64_t>();
            e.selected = detail::hp_from_json(ev.at("selected"));
            for (const auto& t : ev.at("trials"))
                e.trials.push_back({detail::hp_from_json(t), t.at("score").get<double>(), t.at("duration_s").get<double>()});
            r.hpo_events.push_back(std::move(e));
        }
        r.improvement_vs_baseline = detail::optional_from<double>(j, "improvement_vs_baseline");
        r.trade_off_score = detail::optional_from<double>(j, "trade_off_score");
        return r;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, std::string("malformed report: ") + e.what());
    }
}

inline std::string render_text(const EvaluationReport& r) {
    std::ostringstream os;
    os << std::fixed << std::setprecision(4);
    os << "mode            " << to_string(r.mode);
    if (r.tau) os << " (tau=" << *r.tau << ")";
    os << "\nseries          " << r.series_hash << "\nsplit           " << r.train_days << " train / "
       << r.validation_days << " validation / " << r.test_days << " test days\n";
    os << "MAPE            " << r.mean_mape << " % (std " << r.std_mape << ")\n";
    os << "RMSE            " << r.mean_rmse << " kWh (std " << r.std_rmse << ")\n";
    os << "adaptations     " << r.adaptation_count << "\n";
    os << "total cost      " << r.total_cost << " (adaptation " << r.adaptation_cost << ")\n";
    if (r.improvement_vs_baseline) os << "improvement     " << *r.improvement_vs_baseline << " %\n";
    if (r.trade_off_score) os << "trade-off score " << *r.trade_off_score << "\n";
    os << "\n   day_index      mape      rmse  drift\n";
    for (const auto& e : r.daily_errors) {
        bool drift = false;
        for (const auto& d : r.drift_decisions)
            if (d.day_index == e.day_index) drift = d.is_drift;
        os << std::setw(12) << e.day_index << std::setw(10) << e.mape << std::setw(10) << e.rmse
           << (drift ? "  *" : "") << "\n";
    }
    return os.str();
}

inline std::string render_csv(const EvaluationReport& r) {
    std::ostringstream os;
    os << "day_index,mape,rmse\n";
    for (const auto& e : r.daily_errors)
        os << e.day_index << ',' << format_double(e.mape) << ',' << format_double(e.rmse) << '\n';
    return os.str();
}

} // namespace dalstm
