// Command-line front end: run one policy, compare all policies, check the
// shift test's level, or validate a trace file.

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "oclads/experiment.hpp"

namespace fs = std::filesystem;
using namespace oclads;

namespace {

struct CommonOptions {
    std::string config_path;
    std::optional<int> rounds;
    std::optional<std::uint64_t> seed_stream;
    std::optional<std::uint64_t> seed_schedule;
    std::optional<std::uint64_t> seed_model;
    std::optional<std::uint64_t> seed_detector;
    std::string ingest;
    std::string out_dir;
};

void add_common(CLI::App* cmd, CommonOptions& opts) {
    cmd->add_option("--config", opts.config_path, "JSON experiment config")->check(CLI::ExistingFile);
    cmd->add_option("--rounds", opts.rounds, "Number of rounds (synthetic stream)");
    cmd->add_option("--seed-stream", opts.seed_stream, "Seed for batch sampling");
    cmd->add_option("--seed-schedule", opts.seed_schedule, "Seed for the shift and random schedules");
    cmd->add_option("--seed-model", opts.seed_model, "Seed for model init, buffer and training");
    cmd->add_option("--seed-detector", opts.seed_detector, "Seed for permutation draws");
    cmd->add_option("--ingest", opts.ingest, "CSV of feature rows with a trailing 0/1 label");
}

void add_out_dir(CLI::App* cmd, CommonOptions& opts) {
    cmd->add_option("--out-dir", opts.out_dir, "Output directory (default $OCLADS_OUT_DIR or ./out)");
}

ExperimentConfig build_config(const CommonOptions& opts) {
    ExperimentConfig c = opts.config_path.empty() ? ExperimentConfig{} : ExperimentConfig::load(opts.config_path);
    if (opts.rounds) c.n_rounds = *opts.rounds;
    if (opts.seed_stream) c.seeds.stream = *opts.seed_stream;
    if (opts.seed_schedule) c.seeds.schedule = *opts.seed_schedule;
    if (opts.seed_model) c.seeds.model = *opts.seed_model;
    if (opts.seed_detector) c.seeds.detector = *opts.seed_detector;
    if (!opts.ingest.empty()) c.ingest_path = opts.ingest;
    c.validate();
    return c;
}

fs::path resolve_out_dir(const CommonOptions& opts) {
    fs::path dir = opts.out_dir;
    if (dir.empty()) {
        const char* env = std::getenv("OCLADS_OUT_DIR");
        dir = env && *env ? fs::path(env) : fs::path("out");
    }
    fs::create_directories(dir);
    return dir;
}

void write_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    out << text;
    if (!out) throw std::runtime_error("cannot write " + path.string());
}

void write_run(const fs::path& dir, const RunResult& r) {
    const auto name = to_string(r.summary.policy);
    write_file(dir / ("trace_" + name + ".csv"), trace_csv(r.trace));
    write_file(dir / ("summary_" + name + ".json"), summary_json(r.summary));
}

void print_summary(const RunSummary& s) {
    std::cout << to_string(s.policy) << ": online_f1=" << s.final_online_f1
              << " updates=" << s.total_updates << " (post-calibration " << s.updates_post_calibration
              << ") shifts=" << s.true_shifts << " detections=" << s.true_detections
              << " false_alarms=" << s.false_alarms << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"OCLADS edge anomaly-detection simulator"};
    app.require_subcommand(1);

    CommonOptions run_opts;
    std::string policy_name = "oclads";
    auto* run = app.add_subcommand("run", "Run one update policy");
    add_common(run, run_opts);
    add_out_dir(run, run_opts);
    run->add_option("--policy", policy_name,
                    "oclads | all_update | random_update | oracle_oclads | no_update");

    CommonOptions cmp_opts;
    auto* cmp = app.add_subcommand("compare", "Run every configured policy on the same stream");
    add_common(cmp, cmp_opts);
    add_out_dir(cmp, cmp_opts);

    CommonOptions null_opts;
    int trials = 1000;
    int reference_size = 256;
    auto* null = app.add_subcommand("nulltest", "Rejection rate of the shift test on stationary data");
    add_common(null, null_opts);
    add_out_dir(null, null_opts);
    null->add_option("--trials", trials, "Number of same-distribution trials")->check(CLI::PositiveNumber);
    null->add_option("--reference-size", reference_size, "Scorer training points")
        ->check(CLI::Range(2, 1000000));

    std::string trace_path;
    auto* validate = app.add_subcommand("validate-trace", "Check the invariants of a trace CSV");
    validate->add_option("trace", trace_path, "Trace CSV")->required()->check(CLI::ExistingFile);

    CommonOptions print_opts;
    auto* print = app.add_subcommand("print-config", "Print the effective config as JSON");
    add_common(print, print_opts);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) {
            auto config = build_config(run_opts);
            const PolicyKind kind = policy_kind_from_string(policy_name);
            // RandomUpdate needs the OCLADS budget, which compare() supplies.
            config.policies = {kind};
            const auto results = compare(config);
            const auto dir = resolve_out_dir(run_opts);
            for (const auto& r : results) {
                write_run(dir, r);
                print_summary(r.summary);
            }
        } else if (*cmp) {
            const auto config = build_config(cmp_opts);
            const auto results = compare(config);
            const auto dir = resolve_out_dir(cmp_opts);
            for (const auto& r : results) {
                write_run(dir, r);
                print_summary(r.summary);
            }
            write_file(dir / "comparison.csv", comparison_csv(results));
            write_file(dir / "comparison.json", comparison_json(results));
        } else if (*null) {
            const auto config = build_config(null_opts);
            const auto report = nulltest(config, trials, reference_size);
            const auto dir = resolve_out_dir(null_opts);
            write_file(dir / "nulltest.json", report.to_json());
            std::cout << report.to_json() << '\n';
        } else if (*validate) {
            std::ifstream in(trace_path);
            const auto problems = validate_trace(in);
            for (const auto& p : problems) std::cerr << trace_path << ": " << p << '\n';
            if (!problems.empty()) return 1;
            std::cout << trace_path << ": ok\n";
        } else if (*print) {
            std::cout << build_config(print_opts).to_json() << '\n';
        }
    } catch (const std::exception& e) {
        std::cerr << "oclads: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
