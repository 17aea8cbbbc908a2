// Generates a household stream with a level shift, runs every adaptation strategy on it and
// prints the comparison table.
//
//   ./demo [config.json]

#include "dalstm/dalstm.hpp"

#include <iostream>

int main(int argc, char** argv) {
    using namespace dalstm;
    try {
        const std::string path = argc > 1 ? argv[1] : DALSTM_SAMPLES_DIR "/scenario.json";
        const auto doc = read_json_file(path, ErrorCode::InvalidConfig);
        auto cfg = config_from_json(doc);
        const auto series = generate_synthetic(synthetic_from_json(doc));
        const auto data = prepare(cfg, series);
        std::cout << data.split.train.size() << " train / " << data.split.validation.size() << " validation / "
                  << data.split.test.size() << " test days, series " << data.hash << "\n\n";

        const auto initial = train_initial(cfg, data);
        std::cout << "initial model: " << initial.model.hyperparameters.n_units << " units, lr "
                  << initial.model.hyperparameters.learning_rate << ", dropout "
                  << initial.model.hyperparameters.dropout_rate << "\n\n";

        auto run_as = [&](RunMode mode, std::optional<double> tau) {
            cfg.mode = mode;
            cfg.tau = tau;
            return run_prepared(cfg, data, initial).report;
        };
        const auto baseline = run_as(RunMode::Baseline, std::nullopt);
        std::vector<EvaluationReport> candidates;
        for (double tau : {0.07, 0.10, 0.15}) candidates.push_back(run_as(RunMode::Active, tau));
        candidates.push_back(run_as(RunMode::Passive, std::nullopt));
        std::cout << render_table(compare(baseline, candidates));
        return 0;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
