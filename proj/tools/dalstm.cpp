#include "dalstm/dalstm.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <fstream>
#include <iostream>
#include <mutex>
#include <thread>

namespace {

using namespace dalstm;

constexpr int kInputError = 2;
constexpr int kConfigError = 3;
constexpr int kRuntimeError = 4;

int exit_code(ErrorCode code) {
    switch (code) {
    case ErrorCode::EmptySeries:
    case ErrorCode::NonMonotoneTimestamps:
    case ErrorCode::NegativeReading:
    case ErrorCode::UnparseableRow:
    case ErrorCode::GapTooLarge:
    case ErrorCode::NoCompleteDay:
    case ErrorCode::TooFewDays:
    case ErrorCode::InvalidEvent:
    case ErrorCode::InvalidResolution:
    case ErrorCode::MismatchedRuns:
    case ErrorCode::IoError:
    case ErrorCode::BadCheckpoint:
        return kInputError;
    case ErrorCode::InvalidConfig:
    case ErrorCode::InvalidTau:
    case ErrorCode::InvalidSpace:
        return kConfigError;
    default:
        return kRuntimeError;
    }
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
    out << text;
    if (!out) throw Error(ErrorCode::IoError, "write failed for " + path);
}

LoadSeries read_series(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path);
    return parse_load_csv(in);
}

EvaluationReport read_report(const std::string& path) {
    try {
        return report_from_json(read_json_file(path, ErrorCode::IoError));
    } catch (const Error& e) {
        throw Error(ErrorCode::IoError, path + ": " + e.what());
    }
}

RunConfig read_config(const std::string& path) {
    try {
        return load_config(path);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::IoError) throw;
        throw Error(ErrorCode::InvalidConfig, e.what());
    }
}

nlohmann::ordered_json segmentation_json(const SegmentationReport& r) {
    return {{"complete_days", r.complete_days},
            {"leading_dropped", r.leading_dropped},
            {"trailing_dropped", r.trailing_dropped},
            {"anomalous_days", r.anomalous_days}};
}

// ---------------------------------------------------------------------------

struct IngestArgs {
    std::string input, out, report;
    std::size_t max_gap = 6;
    int utc_offset = 0;
};

void ingest(const IngestArgs& a) {
    const auto raw = read_series(a.input);
    const auto series = raw.is_regular() ? raw : resample_and_fill(raw, a.max_gap);
    const auto seg = segment_days(series, a.utc_offset);
    if (seg.days.empty()) throw Error(ErrorCode::NoCompleteDay, a.input);
    write_load_csv(a.out, series);
    auto j = segmentation_json(seg.report);
    j["input_readings"] = raw.size();
    j["output_readings"] = series.size();
    j["resolution_s"] = series.resolution_s;
    j["series_hash"] = series_hash(series);
    if (a.report.empty()) std::cout << j.dump(2) << '\n';
    else write_text(a.report, j.dump(2) + "\n");
}

struct SynthArgs {
    std::string profile, out;
    std::optional<std::uint64_t> seed;
    std::optional<std::int64_t> days;
};

void synth(const SynthArgs& a) {
    auto spec = a.profile.empty() ? SyntheticSpec{} : synthetic_from_json(read_json_file(a.profile, ErrorCode::InvalidConfig));
    if (a.seed) spec.seed = *a.seed;
    if (a.days) spec.n_days = *a.days;
    write_load_csv(a.out, generate_synthetic(spec));
}

struct RunArgs {
    std::string mode, config, checkpoint;
    std::optional<double> tau;
    std::optional<std::uint64_t> seed;
    std::vector<std::string> inputs, outs;
    std::size_t jobs = 1;
};

void run_command(const RunArgs& a) {
    RunConfig cfg = a.config.empty() ? RunConfig{} : read_config(a.config);
    if (!a.mode.empty()) {
        cfg.mode = run_mode_from_string(a.mode);
        if (cfg.mode != RunMode::Active) cfg.tau.reset();
    }
    if (a.tau) cfg.tau = *a.tau;
    if (a.seed) cfg.seed = *a.seed;
    if (cfg.tau && (*cfg.tau < 0.0 || *cfg.tau > 1.0)) throw Error(ErrorCode::InvalidTau, std::to_string(*cfg.tau));
    validate(cfg);
    if (a.outs.size() != a.inputs.size())
        throw Error(ErrorCode::InvalidConfig, "give one --out per --input");
    if (!a.checkpoint.empty() && a.inputs.size() != 1)
        throw Error(ErrorCode::InvalidConfig, "--checkpoint needs exactly one input");

    // streams are independent; parallelism is across input files only
    std::atomic<std::size_t> next{0};
    std::mutex failure_mutex;
    std::optional<Error> failure;
    auto worker = [&] {
        for (std::size_t k = next++; k < a.inputs.size(); k = next++) {
            try {
                const auto outcome = run(cfg, read_series(a.inputs[k]));
                write_text(a.outs[k], to_json(outcome.report).dump(2) + "\n");
                if (!a.checkpoint.empty()) save_checkpoint(a.checkpoint, outcome.final_model);
            } catch (const Error& e) {
                std::lock_guard lock(failure_mutex);
                if (!failure) {
                    std::cerr << "while processing " << a.inputs[k] << '\n';
                    failure = e;
                }
            }
        }
    };
    const std::size_t n_threads = std::max<std::size_t>(1, std::min(a.jobs, a.inputs.size()));
    std::vector<std::thread> pool;
    for (std::size_t t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    if (failure) throw *failure;
}

struct CompareArgs {
    std::string baseline, out;
    std::vector<std::string> candidates;
};

void compare_command(const CompareArgs& a) {
    std::vector<EvaluationReport> candidates;
    for (const auto& c : a.candidates) candidates.push_back(read_report(c));
    const auto cmp = compare(read_report(a.baseline), candidates);
    if (!a.out.empty()) write_text(a.out, to_json(cmp).dump(2) + "\n");
    std::cout << render_table(cmp);
}

void report_command(const std::string& in, const std::string& format) {
    const auto r = read_report(in);
    std::cout << (format == "csv" ? render_csv(r) : render_text(r));
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Drift-aware day-ahead load forecasting"};
    app.require_subcommand(1);

    IngestArgs ingest_args;
    auto* ingest_cmd = app.add_subcommand("ingest", "validate, resample and segment a consumption CSV");
    ingest_cmd->add_option("csv", ingest_args.input, "input CSV (timestamp,consumption_kwh)")->required();
    ingest_cmd->add_option("--out", ingest_args.out, "canonical series CSV")->required();
    ingest_cmd->add_option("--report", ingest_args.report, "segmentation report JSON (default: stdout)");
    ingest_cmd->add_option("--max-gap", ingest_args.max_gap, "longest fillable gap, in readings");
    ingest_cmd->add_option("--utc-offset", ingest_args.utc_offset, "local day boundary offset, in minutes");

    SynthArgs synth_args;
    auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic consumption stream");
    synth_cmd->add_option("--profile", synth_args.profile, "JSON with the synthetic parameters");
    synth_cmd->add_option("--seed", synth_args.seed);
    synth_cmd->add_option("--days", synth_args.days);
    synth_cmd->add_option("--out", synth_args.out)->required();

    RunArgs run_args;
    auto* run_cmd = app.add_subcommand("run", "forecast the test period under one adaptation strategy");
    run_cmd->add_option("--mode", run_args.mode)->check(CLI::IsMember({"baseline", "passive", "active"}));
    run_cmd->add_option("--tau", run_args.tau, "p-value threshold for active mode");
    run_cmd->add_option("--config", run_args.config, "JSON run configuration");
    run_cmd->add_option("--input", run_args.inputs, "series CSV, repeatable")->required();
    run_cmd->add_option("--out", run_args.outs, "report JSON, one per input")->required();
    run_cmd->add_option("--seed", run_args.seed);
    run_cmd->add_option("--jobs", run_args.jobs, "parallel input files")->check(CLI::PositiveNumber);
    run_cmd->add_option("--checkpoint", run_args.checkpoint, "write the final model here");

    CompareArgs compare_args;
    auto* compare_cmd = app.add_subcommand("compare", "tabulate candidates against a baseline report");
    compare_cmd->add_option("--baseline", compare_args.baseline)->required();
    compare_cmd->add_option("--candidate", compare_args.candidates)->required();
    compare_cmd->add_option("--out", compare_args.out, "comparison JSON");

    std::string report_in, report_format = "text";
    auto* report_cmd = app.add_subcommand("report", "render a report");
    report_cmd->add_option("--in", report_in)->required();
    report_cmd->add_option("--format", report_format)->check(CLI::IsMember({"text", "csv"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kConfigError;
    }

    try {
        if (*ingest_cmd) ingest(ingest_args);
        else if (*synth_cmd) synth(synth_args);
        else if (*run_cmd) run_command(run_args);
        else if (*compare_cmd) compare_command(compare_args);
        else if (*report_cmd) report_command(report_in, report_format);
        return 0;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(e.code());
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kRuntimeError;
    }
}
