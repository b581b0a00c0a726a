#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "oclads/device.hpp"
#include "oclads/metrics.hpp"
#include "oclads/model.hpp"
#include "oclads/server.hpp"
#include "oclads/shiftdetect.hpp"
#include "oclads/stream.hpp"

namespace oclads {

class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

struct Seeds {
    std::uint64_t stream = 1;
    std::uint64_t schedule = 2;
    std::uint64_t model = 3;
    std::uint64_t detector = 4;
};

struct ModelConfig {
    int input_dim = 16;
    int hidden_dim = 32;
    TrainConfig train;
    int bootstrap_normal = 100;
    int bootstrap_anomalous = 20;
    int bootstrap_steps = 200;
};

struct ExperimentConfig {
    int n_rounds = 400;
    int batch_size = 64;
    double anomaly_rate = 0.07;
    double shift_prob = 0.15;
    int min_gap = 5;
    DeviceConfig device;
    double alpha = 0.05;
    int n_permutations = 199;
    std::size_t buffer_capacity = 3000;
    ScorerKind scorer = ScorerKind::kernel_mean;
    bool test_all_policies = false;
    int match_window = 0;
    AbsentClass absent_class = AbsentClass::perfect;
    ModelConfig model;
    Seeds seeds;
    std::vector<PolicyKind> policies = all_policies();
    std::optional<std::filesystem::path> ingest_path;

    // Missing keys keep their defaults; unknown keys are rejected.
    static ExperimentConfig from_json(const std::string& text);
    static ExperimentConfig load(const std::filesystem::path& path);
    std::string to_json() const;
    void validate() const;
};

struct TraceRow {
    int round = 0;
    PolicyKind policy = PolicyKind::oclads;
    int k_i = 0;
    std::size_t buffer_size = 0;
    bool testable = false;
    std::optional<double> p_value;
    std::optional<double> t_observed;
    bool detected = false;
    bool transmitted = false;
    double batch_f1 = 0.0;
    double online_f1 = 0.0;
};

struct RunSummary {
    PolicyKind policy = PolicyKind::oclads;
    int total_rounds = 0;
    int calibration_rounds = 0;
    int total_updates = 0;
    int warmup_updates = 0;
    int updates_post_calibration = 0;
    int true_shifts = 0;
    int true_shifts_post_calibration = 0;
    int detections = 0;
    int true_detections = 0;
    int false_alarms = 0;
    int missed = 0;
    double final_online_f1 = 0.0;
    std::uint64_t master_fingerprint = 0;
};

struct RunResult {
    RunSummary summary;
    std::vector<TraceRow> trace;
    ShiftSchedule schedule;
};

// Realized shift schedule for the config (empty when ingesting a file).
ShiftSchedule schedule_for(const ExperimentConfig& config);

// The model every policy starts from.
ModelParams initial_model(const ExperimentConfig& config);

// Executes the full round loop for one policy. `random_rounds` is required
// for RandomUpdate.
RunResult run_policy(const ExperimentConfig& config, PolicyKind policy,
                     const std::optional<std::set<int>>& random_rounds = std::nullopt);

// Runs OCLADS first to fix the RandomUpdate budget, then the remaining
// configured policies on the same stream. Results follow config.policies.
std::vector<RunResult> compare(const ExperimentConfig& config);

std::set<int> random_schedule_for(const ExperimentConfig& config, int n_updates);

struct NullTestReport {
    int trials = 0;
    int rejections = 0;
    int minimum_p_hits = 0;
    double rejection_rate = 0.0;
    double ci_low = 0.0;  // Wilson 95% interval
    double ci_high = 0.0;
    double alpha = 0.0;
    int n_permutations = 0;
    int reference_size = 0;
    int batch_size = 0;

    std::string to_json() const;
};

// Same-distribution batch pairs scored by a scorer fitted on a disjoint
// reference draw; reports how often the test rejects.
NullTestReport nulltest(const ExperimentConfig& config, int n_trials, int reference_size = 256);

inline constexpr const char* kTraceHeader =
    "round,policy,k_i,buffer_size,testable,p_value,t_observed,detected,transmitted,"
    "batch_macro_f1,online_f1";

std::string trace_csv(const std::vector<TraceRow>& rows);
std::string summary_json(const RunSummary& summary);
// Wide table: round followed by one online F1 column per policy, then the
// summaries.
std::string comparison_csv(const std::vector<RunResult>& results);
std::string comparison_json(const std::vector<RunResult>& results);

// Checks the invariants of a trace CSV; returns one message per violation.
std::vector<std::string> validate_trace(std::istream& in);

}  // namespace oclads
