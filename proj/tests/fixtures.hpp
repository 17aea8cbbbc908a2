#pragma once

#include "dalstm/pipeline.hpp"

namespace fixture {

/// Small, fast configuration with a machine-independent cost model.
inline dalstm::RunConfig small_config(std::uint64_t seed = 0) {
    dalstm::RunConfig c;
    c.seed = seed;
    c.drift.load_bandwidth = 0.25;
    c.duration_model = dalstm::DurationModel::Synthetic;
    c.search_space.n_units = {4, 8};
    c.hpo_budget_initial = 3;
    c.hpo_budget_adaptation = 2;
    c.hpo_n_init = 2;
    c.epochs_initial = 6;
    c.epochs_incremental = 4;
    c.train_stride = 3;
    return c;
}

inline dalstm::LoadSeries stream(std::uint64_t seed, std::int64_t n_days, std::vector<dalstm::DriftEvent> events = {}) {
    dalstm::SyntheticSpec s;
    s.seed = seed;
    s.n_days = n_days;
    s.noise_sd = 0.2;
    s.drift_events = std::move(events);
    return dalstm::generate_synthetic(s);
}

} // namespace fixture
