#include "dalstm/pipeline.hpp"
#include "fixtures.hpp"

#include <gtest/gtest.h>

using namespace dalstm;

namespace {

template <class F>
ErrorCode code_of(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorCode::IoError;
}

// Initial training is shared across modes; every run below reuses it.
struct Runs {
    RunConfig cfg;
    LoadSeries series;
    PreparedData data;
    InitialModel initial;

    explicit Runs(std::uint64_t seed, std::int64_t days = 16, std::vector<DriftEvent> events = {{12, DriftKind::MeanShift, 1.2}})
        : cfg(fixture::small_config(seed)), series(fixture::stream(seed, days, std::move(events))),
          data(prepare(cfg, series)), initial(train_initial(cfg, data)) {}

    RunOutcome with(RunMode mode, std::optional<double> tau = std::nullopt) const {
        auto c = cfg;
        c.mode = mode;
        c.tau = tau;
        return run_prepared(c, data, initial);
    }
};

const Runs& shared() {
    static const Runs r(21);
    return r;
}

} // namespace

TEST(Config, Validation) {
    RunConfig c;
    EXPECT_NO_THROW(validate(c));
    c.mode = RunMode::Active;
    EXPECT_EQ(code_of([&] { validate(c); }), ErrorCode::InvalidConfig);
    c.tau = 1.5;
    EXPECT_EQ(code_of([&] { validate(c); }), ErrorCode::InvalidConfig);
    c.tau = 0.1;
    EXPECT_NO_THROW(validate(c));
    c.mode = RunMode::Passive;
    EXPECT_EQ(code_of([&] { validate(c); }), ErrorCode::InvalidConfig);
    c.tau.reset();
    c.search_space.dropout_rates = {1.0};
    EXPECT_EQ(code_of([&] { validate(c); }), ErrorCode::InvalidConfig);
}

TEST(Config, ParsesNestedSections) {
    const auto c = config_from_json(nlohmann::json::parse(R"({
        "mode": "active", "tau": 0.1, "seed": 9, "load_bandwidth": 0.3,
        "hpo": {"initial_budget": 4, "n_units": [8, 16]},
        "epochs": {"initial": 7, "batch_size": 16},
        "duration_model": {"kind": "synthetic", "seconds_per_window_epoch": 0.5}
    })"));
    EXPECT_EQ(c.mode, RunMode::Active);
    EXPECT_EQ(c.tau, 0.1);
    EXPECT_EQ(c.seed, 9u);
    EXPECT_EQ(c.drift.load_bandwidth, 0.3);
    EXPECT_EQ(c.hpo_budget_initial, 4u);
    EXPECT_EQ(c.search_space.n_units, (std::vector<std::size_t>{8, 16}));
    EXPECT_EQ(c.search_space.learning_rates, SearchSpace{}.learning_rates);
    EXPECT_EQ(c.epochs_initial, 7u);
    EXPECT_EQ(c.batch_size, 16u);
    EXPECT_EQ(c.duration_model, DurationModel::Synthetic);
    EXPECT_EQ(c.seconds_per_window_epoch, 0.5);
}

TEST(Config, RejectsUnknownAndMistypedKeys) {
    for (const char* doc : {R"({"tua": 0.1})", R"({"hpo": {"budget": 3}})", R"({"seed": "nine"})",
                            R"({"duration_model": {"kind": "sundial"}})", R"({"mode": "sometimes"})"})
        EXPECT_EQ(code_of([&] { config_from_json(nlohmann::json::parse(doc)); }), ErrorCode::InvalidConfig) << doc;
}

TEST(Config, SyntheticSection) {
    const auto s = synthetic_from_json(nlohmann::json::parse(R"({"synthetic": {
        "n_days": 12, "seed": 4, "noise_sd": 0.05, "start_time": "2022-03-01T00:00:00Z",
        "profile": {"base_kwh": 0.8},
        "drift_events": [{"day": 8, "kind": "scale_shift", "magnitude": 0.5}]
    }})"));
    EXPECT_EQ(s.n_days, 12);
    EXPECT_EQ(s.profile.base_kwh, 0.8);
    ASSERT_EQ(s.drift_events.size(), 1u);
    EXPECT_EQ(s.drift_events[0].kind, DriftKind::ScaleShift);
    EXPECT_EQ(s.start_time, 1646092800);
    EXPECT_EQ(code_of([] {
                  synthetic_from_json(nlohmann::json::parse(R"({"drift_events": [{"day": 1, "kind": "x", "magnitude": 1}]})"));
              }),
              ErrorCode::InvalidConfig);
}

TEST(Prepare, HashIdentifiesInput) {
    auto s = fixture::stream(1, 10);
    const auto h = series_hash(s);
    EXPECT_EQ(h.size(), 16u);
    EXPECT_EQ(series_hash(s), h);
    s.values[100] += 1e-9;
    EXPECT_NE(series_hash(s), h);
}

TEST(Prepare, ChronologicalSplit) {
    const auto d = prepare(fixture::small_config(), fixture::stream(1, 16));
    EXPECT_EQ(d.split.train.size() + d.split.validation.size() + d.split.test.size(), 16u);
    EXPECT_EQ(d.split.test.size(), 4u);
    EXPECT_LT(d.split.train.back().day_index, d.split.validation.front().day_index);
    EXPECT_LT(d.split.validation.back().day_index, d.split.test.front().day_index);
    EXPECT_EQ(d.readings_per_day, 144u);
}

TEST(Baseline, NeverAdapts) {
    const auto r = shared().with(RunMode::Baseline).report;
    EXPECT_EQ(r.adaptation_count, 0u);
    EXPECT_TRUE(r.drift_decisions.empty());
    ASSERT_EQ(r.cost_ledger.entries.size(), 1u);
    EXPECT_EQ(r.cost_ledger.entries[0].kind, CostKind::InitialTraining);
    EXPECT_EQ(r.adaptation_cost, 0.0);
    EXPECT_EQ(r.daily_errors.size(), r.test_days);
    EXPECT_EQ(r.hpo_events.size(), 1u);
    EXPECT_FALSE(r.tau.has_value());
}

TEST(Passive, AdaptsEveryTestDay) {
    const auto r = shared().with(RunMode::Passive).report;
    EXPECT_EQ(r.adaptation_count, r.test_days);
    EXPECT_EQ(r.cost_ledger.count(CostKind::Adaptation), r.test_days);
    EXPECT_EQ(r.cost_ledger.count(CostKind::Hpo), r.test_days);
    EXPECT_EQ(r.hpo_events.size(), r.test_days + 1);
    for (std::size_t k = 1; k < r.hpo_events.size(); ++k) {
        EXPECT_EQ(r.hpo_events[k].day_index, r.daily_errors[k - 1].day_index);
        // structure stays fixed after deployment
        EXPECT_EQ(r.hpo_events[k].selected.n_units, r.hpo_events[0].selected.n_units);
    }
}

TEST(Passive, PredictsBeforeUpdating) {
    const auto b = shared().with(RunMode::Baseline), p = shared().with(RunMode::Passive);
    EXPECT_EQ(b.forecasts.front(), p.forecasts.front());
    EXPECT_EQ(b.report.daily_errors.front().mape, p.report.daily_errors.front().mape);
    EXPECT_NE(b.forecasts.back(), p.forecasts.back());
}

TEST(Active, TauZeroMatchesBaselineBitwise) {
    const auto b = shared().with(RunMode::Baseline).report, a = shared().with(RunMode::Active, 0.0).report;
    EXPECT_EQ(a.adaptation_count, 0u);
    ASSERT_EQ(a.daily_errors.size(), b.daily_errors.size());
    for (std::size_t k = 0; k < a.daily_errors.size(); ++k) {
        EXPECT_EQ(a.daily_errors[k].mape, b.daily_errors[k].mape);
        EXPECT_EQ(a.daily_errors[k].rmse, b.daily_errors[k].rmse);
    }
    EXPECT_EQ(a.total_cost, b.total_cost);
    EXPECT_EQ(a.drift_decisions.size(), a.test_days);
}

TEST(Active, TauOneMatchesPassive) {
    const auto p = shared().with(RunMode::Passive), a = shared().with(RunMode::Active, 1.0);
    EXPECT_EQ(a.report.adaptation_count, p.report.adaptation_count);
    EXPECT_EQ(a.forecasts, p.forecasts);
    EXPECT_EQ(a.report.total_cost, p.report.total_cost);
}

TEST(Active, AdaptsExactlyOnFlaggedDays) {
    const auto r = shared().with(RunMode::Active, 0.15).report;
    std::size_t flagged = 0;
    for (const auto& d : r.drift_decisions) flagged += d.is_drift;
    EXPECT_EQ(r.adaptation_count, flagged);
    EXPECT_EQ(r.cost_ledger.count(CostKind::Adaptation), flagged);
}

TEST(Active, SensitivityOrdering) {
    for (std::uint64_t seed : {31u, 32u, 33u}) {
        const Runs r(seed);
        std::size_t previous = 0;
        for (double tau : {0.0, 0.07, 0.10, 0.15, 0.5, 1.0}) {
            const auto n = r.with(RunMode::Active, tau).report.adaptation_count;
            EXPECT_GE(n, previous) << "seed " << seed << " tau " << tau;
            previous = n;
        }
    }
}

TEST(Costs, MonotoneInAdaptivity) {
    const auto& r = shared();
    const double base = r.with(RunMode::Baseline).report.total_cost;
    const double passive = r.with(RunMode::Passive).report.total_cost;
    for (double tau : {0.0, 0.07, 0.15, 0.5, 1.0}) {
        const double active = r.with(RunMode::Active, tau).report.total_cost;
        EXPECT_LE(base, active) << tau;
        EXPECT_LE(active, passive + 1e-12) << tau;
    }
}

TEST(Leakage, FutureReadingsDoNotChangePastForecasts) {
    const auto& r = shared();
    const auto test = r.data.split.test;
    const std::size_t day = 2, hour = 9, per_day = r.data.readings_per_day, per_hour = per_day / 24;
    // perturb everything from hour 9 of the third test day onward
    auto mutated = r.series;
    const std::size_t first = mutated.values.size() - (test.size() - day) * per_day + hour * per_hour;
    for (std::size_t k = first; k < mutated.values.size(); ++k) mutated.values[k] = 3.0 * mutated.values[k] + 1.0;
    const auto data = prepare(r.cfg, mutated);
    ASSERT_EQ(data.split.test[day].readings[hour * per_hour], mutated.values[first]);

    for (auto [mode, tau] : {std::pair{RunMode::Baseline, std::optional<double>{}},
                             std::pair{RunMode::Passive, std::optional<double>{}},
                             std::pair{RunMode::Active, std::optional<double>{0.5}}}) {
        auto c = r.cfg;
        c.mode = mode, c.tau = tau;
        const auto original = run_prepared(c, r.data, r.initial).forecasts;
        const auto perturbed = run_prepared(c, data, r.initial).forecasts;
        for (std::size_t d = 0; d < day; ++d) EXPECT_EQ(original[d], perturbed[d]) << to_string(mode) << " day " << d;
        for (std::size_t h = 0; h <= hour; ++h) EXPECT_EQ(original[day][h], perturbed[day][h]) << to_string(mode) << " hour " << h;
        EXPECT_NE(original[day][hour + 1], perturbed[day][hour + 1]);
    }
}

TEST(Leakage, InitialTrainingIgnoresTestDays) {
    const auto& r = shared();
    auto mutated = r.series;
    const std::size_t test_readings = r.data.split.test.size() * r.data.readings_per_day;
    for (std::size_t k = mutated.values.size() - test_readings; k < mutated.values.size(); ++k) mutated.values[k] += 5.0;
    const auto again = train_initial(r.cfg, prepare(r.cfg, mutated));
    EXPECT_EQ(to_json(again.model).dump(), to_json(r.initial.model).dump());
}

TEST(Reproducibility, IdenticalInputsGiveIdenticalReports) {
    auto c = fixture::small_config(5);
    c.mode = RunMode::Active, c.tau = 0.15;
    const auto s = fixture::stream(5, 14, {{11, DriftKind::MeanShift, 1.0}});
    EXPECT_EQ(to_json(run(c, s).report).dump(), to_json(run(c, s).report).dump());
}

TEST(Retune, FullRetrainPathRuns) {
    auto c = fixture::small_config(6);
    c.mode = RunMode::Passive;
    c.retune_units_full_retrain = true;
    const auto r = run(c, fixture::stream(6, 12)).report;
    EXPECT_EQ(r.adaptation_count, r.test_days);
    for (const auto& ev : r.hpo_events)
        for (const auto& t : ev.trials)
            EXPECT_TRUE(t.hyperparameters.n_units == 4 || t.hyperparameters.n_units == 8);
}

TEST(Compare, SelfComparisonIsNeutral) {
    const auto b = shared().with(RunMode::Baseline).report;
    const auto cmp = compare(b, {b});
    ASSERT_EQ(cmp.candidates.size(), 1u);
    EXPECT_EQ(cmp.candidates[0].improvement_mape, 0.0);
    EXPECT_EQ(cmp.candidates[0].trade_off_score, 0.0);
    EXPECT_EQ(cmp.series_hash, b.series_hash);
}

TEST(Compare, RowsAndTable) {
    const auto& r = shared();
    const auto b = r.with(RunMode::Baseline).report, p = r.with(RunMode::Passive).report,
               a = r.with(RunMode::Active, 0.1).report;
    const auto cmp = compare(b, {a, p});
    EXPECT_EQ(cmp.candidates[0].label, "active(tau=0.1)");
    EXPECT_EQ(cmp.candidates[1].label, "passive");
    EXPECT_NEAR(cmp.candidates[1].improvement_mape, improvement(p.mean_mape, b.mean_mape), 1e-12);
    ASSERT_TRUE(cmp.candidates[1].trade_off_score.has_value());
    EXPECT_NEAR(*cmp.candidates[1].trade_off_score, cmp.candidates[1].improvement_mape / p.adaptation_cost, 1e-9);
    const auto table = render_table(cmp);
    EXPECT_NE(table.find("passive"), std::string::npos);
    EXPECT_EQ(to_json(cmp).at("candidates").size(), 2u);
}

TEST(Compare, MismatchedRuns) {
    const auto b = shared().with(RunMode::Baseline).report;
    auto other = b;
    other.series_hash = "ffffffffffffffff";
    EXPECT_EQ(code_of([&] { compare(b, {other}); }), ErrorCode::MismatchedRuns);
    other = b;
    other.test_days += 1;
    EXPECT_EQ(code_of([&] { compare(b, {other}); }), ErrorCode::MismatchedRuns);
}

TEST(TradeOffConvention, NoAdaptationNoChangeScoresZero) {
    EXPECT_EQ(comparison_trade_off(0.0, 0.0), 0.0);
    EXPECT_FALSE(comparison_trade_off(3.0, 0.0).has_value());
    EXPECT_NEAR(*comparison_trade_off(13.07, 7.27), 1.80, 0.005);
}
