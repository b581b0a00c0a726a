#include "oclads/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

namespace oclads {

namespace {

using Json = nlohmann::json;
using OrderedJson = nlohmann::ordered_json;

void reject_unknown_keys(const Json& node, std::initializer_list<const char*> allowed,
                         const std::string& where) {
    for (const auto& item : node.items()) {
        const bool known = std::any_of(allowed.begin(), allowed.end(),
                                       [&](const char* k) { return item.key() == k; });
        if (!known) throw ConfigError("unknown key '" + item.key() + "' in " + where);
    }
}

template <typename T>
void read_if(const Json& node, const char* key, T& out) {
    if (node.contains(key)) out = node.at(key).get<T>();
}

std::string absent_class_name(AbsentClass a) {
    return a == AbsentClass::excluded ? "excluded" : "perfect";
}

// Substream tags under each seed.
enum : std::uint64_t {
    kBootstrapStream = 0,
    kBufferStream = 1,
    kTrainStream = 2,
    kRandomScheduleStream = 1,
};

// Batches either drawn from the synthetic generator or read from a file.
class BatchSource {
  public:
    explicit BatchSource(const ExperimentConfig& config) : config_(config) {
        if (config.ingest_path) {
            file_batches_ = ingest_stream(*config.ingest_path, config.batch_size);
            if (file_batches_.empty()) throw ConfigError("ingested stream is empty");
            schedule_.n_rounds = static_cast<int>(file_batches_.size());
        } else {
            schedule_ = build_schedule(config.n_rounds, config.shift_prob, config.min_gap,
                                       config.seeds.schedule);
            generator_.emplace(schedule_,
                               StreamConfig{config.model.input_dim, config.batch_size,
                                            config.anomaly_rate},
                               config.seeds.stream);
        }
    }

    int n_rounds() const { return schedule_.n_rounds; }
    const ShiftSchedule& schedule() const { return schedule_; }

    Batch next(int round) {
        if (generator_) return generator_->next(round);
        return file_batches_[static_cast<std::size_t>(round - 1)];
    }

    const std::vector<Batch>& file_batches() const { return file_batches_; }

  private:
    const ExperimentConfig& config_;
    ShiftSchedule schedule_;
    std::optional<SyntheticStream> generator_;
    std::vector<Batch> file_batches_;
};

int count_after(const std::vector<int>& rounds, int threshold) {
    return static_cast<int>(
        std::count_if(rounds.begin(), rounds.end(), [&](int r) { return r > threshold; }));
}

std::vector<Sample> file_bootstrap_set(const std::vector<Batch>& batches, int n_normal,
                                       int n_anomalous) {
    std::vector<Sample> out;
    int normals = 0;
    int anomalies = 0;
    for (const auto& batch : batches) {
        for (const auto& s : batch.samples) {
            if (s.label == 0 && normals < n_normal) {
                out.push_back(s);
                ++normals;
            } else if (s.label == 1 && anomalies < n_anomalous) {
                out.push_back(s);
                ++anomalies;
            }
        }
    }
    return out;
}

ModelParams initial_model_from(const ExperimentConfig& config, const BatchSource& source) {
    Rng rng(mix_seed(config.seeds.model, kBootstrapStream));
    const auto& m = config.model;
    ModelParams params = ModelParams::random_init(m.input_dim, m.hidden_dim, rng);
    const auto dataset =
        config.ingest_path
            ? file_bootstrap_set(source.file_batches(), m.bootstrap_normal, m.bootstrap_anomalous)
            : make_bootstrap_set(m.input_dim, m.bootstrap_normal, m.bootstrap_anomalous, rng);
    return bootstrap_finetune(std::move(params), dataset, m.train, m.bootstrap_steps, rng);
}

std::string format_optional(const std::optional<double>& v) {
    return v ? fmt::format("{}", *v) : std::string();
}

OrderedJson summary_to_json(const RunSummary& s) {
    OrderedJson doc;
    doc["policy"] = to_string(s.policy);
    doc["total_rounds"] = s.total_rounds;
    doc["calibration_rounds"] = s.calibration_rounds;
    doc["total_updates"] = s.total_updates;
    doc["warmup_updates"] = s.warmup_updates;
    doc["updates_post_calibration"] = s.updates_post_calibration;
    doc["true_shifts"] = s.true_shifts;
    doc["true_shifts_post_calibration"] = s.true_shifts_post_calibration;
    doc["detections"] = s.detections;
    doc["true_detections"] = s.true_detections;
    doc["false_alarms"] = s.false_alarms;
    doc["missed"] = s.missed;
    doc["final_online_f1"] = s.final_online_f1;
    doc["master_fingerprint"] = fmt::format("{:016x}", s.master_fingerprint);
    return doc;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const std::string& text) {
    ExperimentConfig c;
    Json doc;
    try {
        doc = Json::parse(text);
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    try {
        reject_unknown_keys(doc,
                            {"n_rounds", "batch_size", "anomaly_rate", "shift_prob", "min_gap",
                             "calibration_rounds", "s_threshold", "k_min", "alpha",
                             "n_permutations", "buffer_capacity", "scorer", "test_all_policies",
                             "match_window", "absent_class", "model", "seeds", "policies",
                             "ingest"},
                            "config");
        read_if(doc, "n_rounds", c.n_rounds);
        read_if(doc, "batch_size", c.batch_size);
        read_if(doc, "anomaly_rate", c.anomaly_rate);
        read_if(doc, "shift_prob", c.shift_prob);
        read_if(doc, "min_gap", c.min_gap);
        read_if(doc, "calibration_rounds", c.device.calibration_rounds);
        read_if(doc, "s_threshold", c.device.s_threshold);
        read_if(doc, "k_min", c.device.k_min);
        read_if(doc, "alpha", c.alpha);
        read_if(doc, "n_permutations", c.n_permutations);
        read_if(doc, "buffer_capacity", c.buffer_capacity);
        read_if(doc, "test_all_policies", c.test_all_policies);
        read_if(doc, "match_window", c.match_window);
        if (doc.contains("scorer")) {
            c.scorer = scorer_kind_from_string(doc.at("scorer").get<std::string>());
        }
        if (doc.contains("absent_class")) {
            const auto name = doc.at("absent_class").get<std::string>();
            if (name == "perfect") {
                c.absent_class = AbsentClass::perfect;
            } else if (name == "excluded") {
                c.absent_class = AbsentClass::excluded;
            } else {
                throw ConfigError("absent_class must be 'perfect' or 'excluded'");
            }
        }
        if (doc.contains("model")) {
            const auto& m = doc.at("model");
            reject_unknown_keys(m,
                                {"input_dim", "hidden_dim", "learning_rate", "steps_per_batch",
                                 "minibatch_size", "gamma_fl", "alpha_fl", "bootstrap_normal",
                                 "bootstrap_anomalous", "bootstrap_steps"},
                                "model");
            read_if(m, "input_dim", c.model.input_dim);
            read_if(m, "hidden_dim", c.model.hidden_dim);
            read_if(m, "learning_rate", c.model.train.learning_rate);
            read_if(m, "steps_per_batch", c.model.train.steps_per_batch);
            read_if(m, "minibatch_size", c.model.train.minibatch_size);
            read_if(m, "gamma_fl", c.model.train.gamma_fl);
            read_if(m, "alpha_fl", c.model.train.alpha_fl);
            read_if(m, "bootstrap_normal", c.model.bootstrap_normal);
            read_if(m, "bootstrap_anomalous", c.model.bootstrap_anomalous);
            read_if(m, "bootstrap_steps", c.model.bootstrap_steps);
        }
        if (doc.contains("seeds")) {
            const auto& s = doc.at("seeds");
            reject_unknown_keys(s, {"stream", "schedule", "model", "detector"}, "seeds");
            read_if(s, "stream", c.seeds.stream);
            read_if(s, "schedule", c.seeds.schedule);
            read_if(s, "model", c.seeds.model);
            read_if(s, "detector", c.seeds.detector);
        }
        if (doc.contains("policies")) {
            c.policies.clear();
            for (const auto& p : doc.at("policies")) {
                c.policies.push_back(policy_kind_from_string(p.get<std::string>()));
            }
        }
        if (doc.contains("ingest")) c.ingest_path = doc.at("ingest").get<std::string>();
    } catch (const Json::exception& e) {
        throw ConfigError(std::string("bad config value: ") + e.what());
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    return c;
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    return from_json(buffer.str());
}

std::string ExperimentConfig::to_json() const {
    OrderedJson doc;
    doc["n_rounds"] = n_rounds;
    doc["batch_size"] = batch_size;
    doc["anomaly_rate"] = anomaly_rate;
    doc["shift_prob"] = shift_prob;
    doc["min_gap"] = min_gap;
    doc["calibration_rounds"] = device.calibration_rounds;
    doc["s_threshold"] = device.s_threshold;
    doc["k_min"] = device.k_min;
    doc["alpha"] = alpha;
    doc["n_permutations"] = n_permutations;
    doc["buffer_capacity"] = buffer_capacity;
    doc["scorer"] = to_string(scorer);
    doc["test_all_policies"] = test_all_policies;
    doc["match_window"] = match_window;
    doc["absent_class"] = absent_class_name(absent_class);
    doc["model"] = {{"input_dim", model.input_dim},
                    {"hidden_dim", model.hidden_dim},
                    {"learning_rate", model.train.learning_rate},
                    {"steps_per_batch", model.train.steps_per_batch},
                    {"minibatch_size", model.train.minibatch_size},
                    {"gamma_fl", model.train.gamma_fl},
                    {"alpha_fl", model.train.alpha_fl},
                    {"bootstrap_normal", model.bootstrap_normal},
                    {"bootstrap_anomalous", model.bootstrap_anomalous},
                    {"bootstrap_steps", model.bootstrap_steps}};
    doc["seeds"] = {{"stream", seeds.stream},
                    {"schedule", seeds.schedule},
                    {"model", seeds.model},
                    {"detector", seeds.detector}};
    doc["policies"] = OrderedJson::array();
    for (PolicyKind p : policies) doc["policies"].push_back(to_string(p));
    if (ingest_path) doc["ingest"] = ingest_path->string();
    return doc.dump(2);
}

void ExperimentConfig::validate() const {
    auto require = [](bool ok, const char* message) {
        if (!ok) throw ConfigError(message);
    };
    require(ingest_path || n_rounds >= 1, "n_rounds must be at least 1");
    require(batch_size >= 1, "batch_size must be at least 1");
    require(anomaly_rate >= 0.0 && anomaly_rate <= 1.0, "anomaly_rate must be in [0, 1]");
    require(shift_prob >= 0.0 && shift_prob <= 1.0, "shift_prob must be in [0, 1]");
    require(min_gap >= 1, "min_gap must be at least 1");
    require(device.calibration_rounds >= 0, "calibration_rounds must be nonnegative");
    require(device.s_threshold >= 0.0 && device.s_threshold <= 1.0, "s_threshold must be in [0, 1]");
    require(device.k_min >= 0, "k_min must be nonnegative");
    require(alpha > 0.0 && alpha < 1.0, "alpha must be in (0, 1)");
    require(n_permutations >= 1, "n_permutations must be at least 1");
    require(match_window >= 0, "match_window must be nonnegative");
    require(model.input_dim >= 1 && model.hidden_dim >= 1, "model dimensions must be positive");
    require(model.train.learning_rate >= 0.0, "learning_rate must be nonnegative");
    require(model.train.steps_per_batch >= 1, "steps_per_batch must be positive");
    require(model.train.minibatch_size >= 1, "minibatch_size must be positive");
    require(model.train.gamma_fl >= 0.0, "gamma_fl must be nonnegative");
    require(model.train.alpha_fl > 0.0 && model.train.alpha_fl < 1.0, "alpha_fl must be in (0, 1)");
    require(model.bootstrap_normal + model.bootstrap_anomalous >= 1, "bootstrap set is empty");
    require(!policies.empty(), "at least one policy is required");
}

ShiftSchedule schedule_for(const ExperimentConfig& config) {
    return BatchSource(config).schedule();
}

ModelParams initial_model(const ExperimentConfig& config) {
    const BatchSource source(config);
    return initial_model_from(config, source);
}

std::set<int> random_schedule_for(const ExperimentConfig& config, int n_updates) {
    Rng rng(mix_seed(config.seeds.schedule, kRandomScheduleStream));
    const int n_rounds = schedule_for(config).n_rounds;
    return make_random_schedule(n_rounds, n_updates,
                                std::min(config.device.calibration_rounds, n_rounds), rng);
}

RunResult run_policy(const ExperimentConfig& base_config, PolicyKind policy_kind,
                     const std::optional<std::set<int>>& random_rounds) {
    base_config.validate();
    ExperimentConfig config = base_config;
    BatchSource source(config);
    if (config.ingest_path) {
        const auto& first = source.file_batches().front().samples.front();
        config.model.input_dim = static_cast<int>(first.features.size());
    }
    const int n_rounds = source.n_rounds();
    const int calibration = std::min(config.device.calibration_rounds, n_rounds);
    const auto shift_rounds = source.schedule().shift_rounds();

    UpdatePolicy policy{policy_kind, {}};
    if (policy_kind == PolicyKind::oracle) {
        policy.rounds.insert(shift_rounds.begin(), shift_rounds.end());
    } else if (policy_kind == PolicyKind::random_update) {
        if (!random_rounds) throw ConfigError("random_update needs an update schedule");
        policy.rounds = *random_rounds;
    }

    ModelParams start = initial_model_from(config, source);
    Device device(start, config.device);

    ServerConfig server_cfg;
    server_cfg.calibration_rounds = config.device.calibration_rounds;
    server_cfg.buffer_capacity = config.buffer_capacity;
    server_cfg.train = config.model.train;
    server_cfg.test = ShiftTestConfig{config.alpha, config.n_permutations, config.seeds.detector};
    server_cfg.scorer = config.scorer;
    server_cfg.test_all_policies = config.test_all_policies;
    Server server(std::move(start), policy, server_cfg, mix_seed(config.seeds.model, kBufferStream),
                  mix_seed(config.seeds.model, kTrainStream));

    RunResult result;
    result.schedule = source.schedule();
    OnlineMean online;
    std::vector<std::pair<int, bool>> detections;
    std::vector<int> truth;

    for (int round = 1; round <= n_rounds; ++round) {
        const Batch batch = source.next(round);
        const InferenceResult inference = device.infer_batch(batch);
        truth.clear();
        for (const auto& s : batch.samples) truth.push_back(s.label);

        TraceRow row;
        row.round = round;
        row.policy = policy_kind;
        row.batch_f1 = macro_f1(truth, inference.predictions, config.absent_class);
        row.online_f1 = online.add(row.batch_f1);

        const UplinkPayload payload = device.select_samples(batch, inference.scores);
        row.k_i = static_cast<int>(payload.selected.size());

        const RoundOutcome outcome = server.process_round(payload);
        row.buffer_size = server.buffer().size();
        row.testable = outcome.testable;
        if (outcome.verdict) {
            row.p_value = outcome.verdict->p_value;
            row.t_observed = outcome.verdict->t_observed;
            row.detected = outcome.verdict->shift_detected;
            detections.emplace_back(round, row.detected);
        }
        if (outcome.downlink) {
            device.install_model(*outcome.downlink);
            row.transmitted = true;
        }
        result.trace.push_back(row);
    }

    RunSummary& s = result.summary;
    s.policy = policy_kind;
    s.total_rounds = n_rounds;
    s.calibration_rounds = calibration;
    for (const auto& row : result.trace) {
        if (!row.transmitted) continue;
        ++s.total_updates;
        if (row.round <= calibration) {
            ++s.warmup_updates;
        } else {
            ++s.updates_post_calibration;
        }
    }
    const DetectionSummary matched = match_detections(detections, shift_rounds, config.match_window);
    s.true_shifts = static_cast<int>(shift_rounds.size());
    s.true_shifts_post_calibration = count_after(shift_rounds, calibration);
    s.detections = matched.true_detections + matched.false_alarms;
    s.true_detections = matched.true_detections;
    s.false_alarms = matched.false_alarms;
    s.missed = matched.missed_shifts;
    s.final_online_f1 = online.value();
    s.master_fingerprint = server.master_model().fingerprint();
    return result;
}

std::vector<RunResult> compare(const ExperimentConfig& config) {
    config.validate();
    std::map<PolicyKind, RunResult> results;
    const bool wants_random =
        std::find(config.policies.begin(), config.policies.end(), PolicyKind::random_update) !=
        config.policies.end();
    const bool wants_oclads = std::find(config.policies.begin(), config.policies.end(),
                                        PolicyKind::oclads) != config.policies.end();
    if (wants_random || wants_oclads) {
        results.emplace(PolicyKind::oclads, run_policy(config, PolicyKind::oclads));
    }
    for (PolicyKind kind : config.policies) {
        if (results.contains(kind)) continue;
        if (kind == PolicyKind::random_update) {
            const int budget = results.at(PolicyKind::oclads).summary.updates_post_calibration;
            results.emplace(kind, run_policy(config, kind, random_schedule_for(config, budget)));
        } else {
            results.emplace(kind, run_policy(config, kind));
        }
    }
    std::vector<RunResult> ordered;
    std::set<PolicyKind> emitted;
    for (PolicyKind kind : config.policies) {
        if (emitted.insert(kind).second) ordered.push_back(results.at(kind));
    }
    return ordered;
}

std::string NullTestReport::to_json() const {
    OrderedJson doc;
    doc["trials"] = trials;
    doc["rejections"] = rejections;
    doc["rejection_rate"] = rejection_rate;
    doc["ci95_low"] = ci_low;
    doc["ci95_high"] = ci_high;
    doc["alpha"] = alpha;
    doc["n_permutations"] = n_permutations;
    doc["minimum_p_hits"] = minimum_p_hits;
    doc["reference_size"] = reference_size;
    doc["batch_size"] = batch_size;
    return doc.dump(2);
}

NullTestReport nulltest(const ExperimentConfig& config, int n_trials, int reference_size) {
    config.validate();
    if (n_trials < 1) throw ConfigError("n_trials must be positive");
    if (reference_size < 2) throw ConfigError("reference_size must be at least 2");

    const ShiftSchedule stationary{1, {}};
    const int dim = config.model.input_dim;
    NullTestReport report;
    report.trials = n_trials;
    report.alpha = config.alpha;
    report.n_permutations = config.n_permutations;
    report.reference_size = reference_size;
    report.batch_size = config.batch_size;
    const double p_min = 1.0 / static_cast<double>(config.n_permutations + 1);

    for (int trial = 0; trial < n_trials; ++trial) {
        Rng rng(mix_seed(config.seeds.stream, static_cast<std::uint64_t>(trial)));
        const Batch reference =
            next_batch(stationary, 1, reference_size, config.anomaly_rate, dim, rng);
        const Batch cal = next_batch(stationary, 1, config.batch_size, config.anomaly_rate, dim, rng);
        const Batch test = next_batch(stationary, 1, config.batch_size, config.anomaly_rate, dim, rng);
        const auto scorer = fit_scorer(FeatureMatrix::from_samples(reference.samples), config.scorer);
        const ShiftTestConfig cfg{config.alpha, config.n_permutations,
                                  mix_seed(config.seeds.detector, static_cast<std::uint64_t>(trial))};
        const ShiftVerdict v = permutation_test(*scorer, FeatureMatrix::from_samples(cal.samples),
                                                FeatureMatrix::from_samples(test.samples), cfg);
        report.rejections += v.shift_detected;
        report.minimum_p_hits += v.p_value == p_min;
    }

    const double n = n_trials;
    const double rate = report.rejections / n;
    const double z = 1.959963984540054;
    const double denom = 1.0 + z * z / n;
    const double centre = (rate + z * z / (2.0 * n)) / denom;
    const double half = z * std::sqrt(rate * (1.0 - rate) / n + z * z / (4.0 * n * n)) / denom;
    report.rejection_rate = rate;
    report.ci_low = std::max(0.0, centre - half);
    report.ci_high = std::min(1.0, centre + half);
    return report;
}

std::string trace_csv(const std::vector<TraceRow>& rows) {
    std::string out = std::string(kTraceHeader) + "\n";
    for (const auto& r : rows) {
        out += fmt::format("{},{},{},{},{},{},{},{},{},{},{}\n", r.round, to_string(r.policy), r.k_i,
                           r.buffer_size, r.testable ? 1 : 0, format_optional(r.p_value),
                           format_optional(r.t_observed), r.detected ? 1 : 0,
                           r.transmitted ? 1 : 0, r.batch_f1, r.online_f1);
    }
    return out;
}

std::string summary_json(const RunSummary& summary) { return summary_to_json(summary).dump(2); }

std::string comparison_csv(const std::vector<RunResult>& results) {
    std::string out = "round";
    for (const auto& r : results) out += ",online_f1_" + to_string(r.summary.policy);
    for (const auto& r : results) out += ",transmitted_" + to_string(r.summary.policy);
    out += "\n";
    const std::size_t n = results.empty() ? 0 : results.front().trace.size();
    for (std::size_t i = 0; i < n; ++i) {
        out += std::to_string(i + 1);
        for (const auto& r : results) out += fmt::format(",{}", r.trace[i].online_f1);
        for (const auto& r : results) out += r.trace[i].transmitted ? ",1" : ",0";
        out += "\n";
    }
    return out;
}

std::string comparison_json(const std::vector<RunResult>& results) {
    OrderedJson doc;
    doc["policies"] = OrderedJson::array();
    for (const auto& r : results) doc["policies"].push_back(summary_to_json(r.summary));
    return doc.dump(2);
}

std::vector<std::string> validate_trace(std::istream& in) {
    std::vector<std::string> problems;
    std::string line;
    if (!std::getline(in, line)) return {"trace is empty"};
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kTraceHeader) return {"unexpected header: " + line};

    auto report = [&](std::size_t line_no, const std::string& what) {
        problems.push_back("line " + std::to_string(line_no) + ": " + what);
    };
    auto parse_num = [](const std::string& s, double& out) {
        try {
            std::size_t used = 0;
            out = std::stod(s, &used);
            return used == s.size();
        } catch (const std::exception&) {
            return false;
        }
    };

    std::size_t line_no = 1;
    int expected_round = 1;
    double prev_online = 0.0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> f;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ',')) f.push_back(field);
        if (!line.empty() && line.back() == ',') f.emplace_back();
        if (f.size() != 11) {
            report(line_no, "expected 11 columns, found " + std::to_string(f.size()));
            continue;
        }
        double round = 0, k_i = 0, testable = 0, detected = 0, transmitted = 0, batch_f1 = 0,
               online = 0, buffer = 0;
        if (!parse_num(f[0], round) || !parse_num(f[2], k_i) || !parse_num(f[3], buffer) ||
            !parse_num(f[4], testable) || !parse_num(f[7], detected) ||
            !parse_num(f[8], transmitted) || !parse_num(f[9], batch_f1) ||
            !parse_num(f[10], online)) {
            report(line_no, "non-numeric field");
            continue;
        }
        try {
            policy_kind_from_string(f[1]);
        } catch (const std::invalid_argument&) {
            report(line_no, "unknown policy " + f[1]);
        }
        if (static_cast<int>(round) != expected_round) {
            report(line_no, "round " + f[0] + " out of sequence");
        }
        if (k_i < 0 || buffer < 0) report(line_no, "negative count");
        for (double flag : {testable, detected, transmitted}) {
            if (flag != 0.0 && flag != 1.0) report(line_no, "boolean column is not 0/1");
        }
        if (batch_f1 < 0.0 || batch_f1 > 1.0) report(line_no, "batch_macro_f1 outside [0, 1]");
        if (online < 0.0 || online > 1.0) report(line_no, "online_f1 outside [0, 1]");
        const double i = expected_round;
        if (std::abs(i * online - (i - 1.0) * prev_online - batch_f1) > 1e-12) {
            report(line_no, "online_f1 is not the running mean of batch_macro_f1");
        }
        if (testable == 1.0) {
            double p = 0;
            double t = 0;
            if (!parse_num(f[5], p) || !parse_num(f[6], t)) {
                report(line_no, "testable row without p_value/t_observed");
            } else {
                if (!(p > 0.0 && p <= 1.0)) report(line_no, "p_value outside (0, 1]");
                if (t < 0.0) report(line_no, "negative t_observed");
            }
        } else if (detected == 1.0 || !f[5].empty()) {
            report(line_no, "verdict recorded on a non-testable round");
        }
        prev_online = online;
        expected_round = static_cast<int>(round) + 1;
    }
    if (line_no == 1) problems.push_back("trace has no rows");
    return problems;
}

}  // namespace oclads
