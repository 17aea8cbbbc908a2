#include "dalstm/eval.hpp"
#include "reference_tables.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

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
    return ErrorCode::InvalidConfig;
}

std::vector<std::vector<double>> constant_hours(double v, std::size_t per_hour = 6) {
    return std::vector<std::vector<double>>(24, std::vector<double>(per_hour, v));
}

} // namespace

TEST(Mape, UnitExample) {
    const std::vector<double> a{100, 100}, f{90, 110};
    EXPECT_EQ(mape(a, f), 10.0);
}

TEST(Mape, PerfectForecastIsZero) {
    const std::vector<double> a{1.5, 2.0, 0.3};
    EXPECT_EQ(mape(a, a), 0.0);
}

TEST(Mape, ZeroActual) {
    const std::vector<double> a{0.0, 2.0}, f{1.0, 1.0};
    EXPECT_EQ(code_of([&] { mape(a, f); }), ErrorCode::ZeroActual);
    MapeOptions skip;
    skip.exclude_zero = true;
    EXPECT_DOUBLE_EQ(mape(a, f, skip), 50.0);
    const std::vector<double> zeros{0.0, 0.0};
    EXPECT_EQ(code_of([&] { mape(zeros, f, skip); }), ErrorCode::ZeroActual);
}

TEST(Mape, LengthMismatch) {
    const std::vector<double> a{1.0, 2.0}, f{1.0};
    EXPECT_EQ(code_of([&] { mape(a, f); }), ErrorCode::LengthMismatch);
    EXPECT_EQ(code_of([&] { mape(std::vector<double>{}, std::vector<double>{}); }), ErrorCode::LengthMismatch);
}

TEST(Mape, ScaleInvariant) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.1, 5.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> a(12), f(12), as(12), fs(12);
        const double c = u(rng);
        for (std::size_t k = 0; k < 12; ++k) {
            a[k] = u(rng), f[k] = u(rng);
            as[k] = c * a[k], fs[k] = c * f[k];
        }
        EXPECT_NEAR(mape(as, fs), mape(a, f), 1e-9 * mape(a, f));
        EXPECT_GE(mape(a, f), 0.0);
    }
}

TEST(Rmse, UnitExample) {
    const std::vector<double> a{1, 1}, f{0, 2};
    EXPECT_EQ(rmse(a, f), 1.0);
}

TEST(Rmse, ShiftInvariantAndScaleEquivariant) {
    std::mt19937_64 rng(4);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> a(10), f(10), shifted_a(10), shifted_f(10), scaled_a(10), scaled_f(10);
        for (std::size_t k = 0; k < 10; ++k) {
            a[k] = n(rng), f[k] = n(rng);
            shifted_a[k] = a[k] + 7.0, shifted_f[k] = f[k] + 7.0;
            scaled_a[k] = 3.0 * a[k], scaled_f[k] = 3.0 * f[k];
        }
        EXPECT_NEAR(rmse(shifted_a, shifted_f), rmse(a, f), 1e-12);
        EXPECT_NEAR(rmse(scaled_a, scaled_f), 3.0 * rmse(a, f), 1e-12);
    }
}

TEST(Rmse, DominatesMeanAbsoluteError) {
    const std::vector<double> a{1, 2, 3, 4}, f{1.5, 2, 2, 4.2};
    double mae = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) mae += std::abs(a[k] - f[k]) / 4.0;
    EXPECT_GE(rmse(a, f), mae);
}

TEST(DailyError, AveragesHourlyScores) {
    auto actual = constant_hours(2.0), forecast = constant_hours(2.0);
    for (std::size_t h = 0; h < 12; ++h) std::fill(forecast[h].begin(), forecast[h].end(), 2.2);
    const auto e = daily_error(7, actual, forecast);
    EXPECT_EQ(e.day_index, 7);
    EXPECT_NEAR(e.mape, 5.0, 1e-12);
    EXPECT_NEAR(e.rmse, 0.1, 1e-12);
}

TEST(DailyError, HourlyRmseBeforeAveraging) {
    // one hour entirely off by 2.4 kWh: the hour-first average gives 0.1, a pooled RMSE would give sqrt(0.24)
    auto actual = constant_hours(1.0), forecast = constant_hours(1.0);
    std::fill(forecast[5].begin(), forecast[5].end(), 3.4);
    EXPECT_NEAR(daily_error(0, actual, forecast).rmse, 0.1, 1e-12);
}

TEST(DailyError, WrongCount) {
    const auto actual = constant_hours(1.0);
    const std::vector<std::vector<double>> short_day(23, std::vector<double>(6, 1.0));
    EXPECT_EQ(code_of([&] { daily_error(0, actual, short_day); }), ErrorCode::WrongCount);
    EXPECT_EQ(code_of([&] { hourly_blocks(std::vector<double>(100, 1.0)); }), ErrorCode::WrongCount);
}

TEST(HourlyBlocks, SplitsEvenly) {
    std::vector<double> r(144);
    std::iota(r.begin(), r.end(), 0.0);
    const auto b = hourly_blocks(r);
    ASSERT_EQ(b.size(), 24u);
    EXPECT_EQ(b[3], (std::vector<double>{18, 19, 20, 21, 22, 23}));
}

TEST(CostLedger, PricesByTheMinute) {
    auto l = record_cost({}, 0, CostKind::InitialTraining, 600.0);
    EXPECT_NEAR(l.total(), 10.0 * 0.027, 1e-15);
    EXPECT_EQ(l.adaptation_total(), 0.0);
}

TEST(CostLedger, PerDayAverageOfPassiveRun) {
    // 15.93 total over 58 adaptation days
    CostLedger l;
    const double minutes = 15.93 / 0.027;
    for (int d = 0; d < 58; ++d) l = record_cost(std::move(l), d, CostKind::Adaptation, minutes * 60.0 / 58.0);
    EXPECT_NEAR(l.total(), 15.93, 1e-9);
    EXPECT_NEAR(l.total() / 58.0, 0.27, 0.005);
}

TEST(CostLedger, AdditiveAndOrderIndependent) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 500.0);
    std::vector<CostEntry> entries;
    for (int k = 0; k < 40; ++k) entries.push_back({k, k % 3 == 0 ? CostKind::Hpo : CostKind::Adaptation, u(rng)});
    CostLedger forward, backward, first, second;
    for (const auto& e : entries) forward = record_cost(forward, e.day_index, e.kind, e.duration_s);
    for (auto it = entries.rbegin(); it != entries.rend(); ++it)
        backward = record_cost(backward, it->day_index, it->kind, it->duration_s);
    for (std::size_t k = 0; k < entries.size(); ++k) {
        auto& half = k < 17 ? first : second;
        half = record_cost(half, entries[k].day_index, entries[k].kind, entries[k].duration_s);
    }
    EXPECT_NEAR(forward.total(), backward.total(), 1e-12);
    EXPECT_NEAR(forward.total(), first.total() + second.total(), 1e-12);
    EXPECT_EQ(forward.count(CostKind::Hpo), 14u);
}

TEST(CostLedger, NegativeDuration) {
    EXPECT_EQ(code_of([] { record_cost({}, 0, CostKind::Adaptation, -1.0); }), ErrorCode::NegativeDuration);
}

TEST(Improvement, HouseholdExamples) {
    EXPECT_NEAR(improvement(2.95, 6.56), 55.03, 0.005);
    EXPECT_NEAR(improvement(0.21, 0.45), 53.33, 0.005);
    EXPECT_EQ(improvement(3.0, 3.0), 0.0);
    EXPECT_LT(improvement(4.0, 3.0), 0.0);
}

TEST(Improvement, ZeroBaseline) {
    EXPECT_EQ(code_of([] { improvement(1.0, 0.0); }), ErrorCode::ZeroBaseline);
}

TEST(TradeOff, HouseholdExamples) {
    EXPECT_NEAR(trade_off_score(64.03, 20.60), 3.11, 0.005);
    EXPECT_NEAR(trade_off_score(27.74, 7.53), 3.68, 0.005);
}

TEST(TradeOff, ZeroCost) {
    EXPECT_EQ(code_of([] { trade_off_score(10.0, 0.0); }), ErrorCode::ZeroCost);
}

TEST(TradeOff, PublishedTableRecomputesWherePrinted) {
    // every cell except the one known misprint (13.07 / 7.27 is 1.80, printed 1.88)
    for (std::size_t h = 0; h < 9; ++h)
        for (std::size_t c = 0; c < 4; ++c) {
            if (h == 8 && c == 0) continue;
            const double cost = reference::kCost[h][c];
            const double ts = cost > 0.0 ? trade_off_score(reference::kImprovement[h][c], cost) : 0.0;
            EXPECT_NEAR(ts, reference::kTradeOff[h][c], 0.02) << "household " << h + 1 << " " << reference::kColumns[c];
        }
}

TEST(MeanStd, Population) {
    const std::vector<double> xs{2, 4, 4, 4, 5, 5, 7, 9};
    const auto ms = mean_std(xs);
    EXPECT_EQ(ms.mean, 5.0);
    EXPECT_EQ(ms.std, 2.0);
    EXPECT_EQ(mean_std(std::vector<double>{}).mean, 0.0);
}

namespace {

EvaluationReport sample_report() {
    EvaluationReport r;
    r.mode = RunMode::Active;
    r.tau = 0.1;
    r.series_hash = "0123456789abcdef";
    r.train_days = 20, r.validation_days = 4, r.test_days = 3;
    r.daily_errors = {{24, 5.5, 0.12}, {25, 7.25, 0.2}, {26, 4.0, 0.1}};
    r.drift_decisions = {{24, 0.1, 0.4, false, 0.1}, {25, 0.5, 0.01, true, 0.1}, {26, 0.2, 0.3, false, 0.1}};
    r.adaptation_count = 1;
    r.cost_ledger = record_cost(record_cost(record_cost({}, 23, CostKind::InitialTraining, 300.0), 25, CostKind::Hpo, 40.0),
                                25, CostKind::Adaptation, 12.5);
    HpoEvent ev{25, {0.001, 0.2, 64}, {{{0.001, 0.2, 64}, 3.5, 20.0}, {{0.01, 0.1, 64}, 4.5, 20.0}}};
    r.hpo_events = {ev};
    r.improvement_vs_baseline = 12.5;
    r.finalize();
    return r;
}

} // namespace

TEST(Report, FinalizeComputesAggregates) {
    const auto r = sample_report();
    EXPECT_NEAR(r.mean_mape, (5.5 + 7.25 + 4.0) / 3.0, 1e-12);
    EXPECT_NEAR(r.total_cost, 352.5 / 60.0 * 0.027, 1e-12);
    EXPECT_NEAR(r.adaptation_cost, 52.5 / 60.0 * 0.027, 1e-12);
    EXPECT_LE(r.adaptation_cost, r.total_cost);
}

TEST(Report, JsonRoundTrip) {
    const auto r = sample_report();
    const auto text = to_json(r).dump();
    const auto back = report_from_json(nlohmann::json::parse(text));
    EXPECT_EQ(to_json(back).dump(), text);
    EXPECT_FALSE(back.trade_off_score.has_value());
    EXPECT_EQ(back.tau, r.tau);
    ASSERT_EQ(back.hpo_events.size(), 1u);
    EXPECT_EQ(back.hpo_events[0].trials[1].hyperparameters.learning_rate, 0.01);
}

TEST(Report, BaselineHasNullTau) {
    auto r = sample_report();
    r.mode = RunMode::Baseline;
    r.tau.reset();
    const auto j = to_json(r);
    EXPECT_TRUE(j.at("tau").is_null());
    EXPECT_FALSE(report_from_json(nlohmann::json::parse(j.dump())).tau.has_value());
}

TEST(Report, MalformedJson) {
    EXPECT_EQ(code_of([] { report_from_json(nlohmann::json::parse(R"({"schema_version": 1})")); }),
              ErrorCode::InvalidConfig);
    EXPECT_EQ(code_of([] { report_from_json(nlohmann::json::parse(R"({"schema_version": 99})")); }),
              ErrorCode::InvalidConfig);
}

TEST(Report, CsvHasOneRowPerDay) {
    const auto csv = render_csv(sample_report());
    EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 4);
    EXPECT_EQ(csv.rfind("day_index,mape,rmse\n", 0), 0u);
    EXPECT_NE(csv.find("25,7.25,0.2"), std::string::npos);
}

TEST(Report, TextMarksDriftDays) {
    const auto text = render_text(sample_report());
    EXPECT_NE(text.find("active (tau=0.1000)"), std::string::npos);
    EXPECT_NE(text.find("  *"), std::string::npos);
}
