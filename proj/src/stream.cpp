#include "oclads/stream.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

namespace oclads {

namespace {

// Severity -> displacement of shift_mean, in units of the base sigma.
double mean_shift_for(int severity) {
    switch (severity) {
        case 3:
            return 1.5;
        case 5:
            return 3.0;
        default:
            return 0.0;
    }
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
    std::vector<std::string_view> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string_view::npos) {
            fields.push_back(trim(line.substr(start)));
            break;
        }
        fields.push_back(trim(line.substr(start, comma - start)));
        start = comma + 1;
    }
    return fields;
}

bool parse_double(std::string_view field, double& out) {
    if (field.empty()) return false;
    if (field.front() == '+') field.remove_prefix(1);
    const auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
    return ec == std::errc() && ptr == field.data() + field.size() && std::isfinite(out);
}

}  // namespace

std::string to_string(CorruptionKind kind) {
    switch (kind) {
        case CorruptionKind::none:
            return "none";
        case CorruptionKind::shift_mean:
            return "shift_mean";
        case CorruptionKind::scale:
            return "scale";
        case CorruptionKind::rotate_pair:
            return "rotate_pair";
    }
    return "none";
}

CorruptionKind corruption_kind_from_string(const std::string& name) {
    if (name == "none") return CorruptionKind::none;
    if (name == "shift_mean") return CorruptionKind::shift_mean;
    if (name == "scale") return CorruptionKind::scale;
    if (name == "rotate_pair") return CorruptionKind::rotate_pair;
    throw std::invalid_argument("unknown corruption kind: " + name);
}

const std::vector<Regime>& regime_catalogue() {
    static const std::vector<Regime> catalogue = {
        {CorruptionKind::none, 0},        {CorruptionKind::shift_mean, 3},
        {CorruptionKind::shift_mean, 5},  {CorruptionKind::scale, 3},
        {CorruptionKind::scale, 5},       {CorruptionKind::rotate_pair, 3},
        {CorruptionKind::rotate_pair, 5},
    };
    return catalogue;
}

Regime ShiftSchedule::regime_at(int round) const {
    Regime active;
    for (const auto& entry : entries) {
        if (entry.round > round) break;
        active = entry.regime;
    }
    return active;
}

std::vector<int> ShiftSchedule::shift_rounds() const {
    std::vector<int> rounds;
    for (const auto& entry : entries) {
        if (entry.round >= 2) rounds.push_back(entry.round);
    }
    return rounds;
}

std::string ShiftSchedule::to_json() const {
    nlohmann::ordered_json doc;
    doc["n_rounds"] = n_rounds;
    doc["entries"] = nlohmann::ordered_json::array();
    for (const auto& entry : entries) {
        nlohmann::ordered_json item;
        item["round"] = entry.round;
        item["kind"] = to_string(entry.regime.kind);
        item["severity"] = entry.regime.severity;
        doc["entries"].push_back(std::move(item));
    }
    return doc.dump(2);
}

ShiftSchedule ShiftSchedule::from_json(const std::string& text) {
    const auto doc = nlohmann::json::parse(text);
    ShiftSchedule schedule;
    schedule.n_rounds = doc.at("n_rounds").get<int>();
    for (const auto& item : doc.at("entries")) {
        ScheduleEntry entry;
        entry.round = item.at("round").get<int>();
        entry.regime.kind = corruption_kind_from_string(item.at("kind").get<std::string>());
        entry.regime.severity = item.at("severity").get<int>();
        schedule.entries.push_back(entry);
    }
    return schedule;
}

ShiftSchedule build_schedule(int n_rounds, double shift_prob, int min_gap, std::uint64_t seed) {
    ShiftSchedule schedule;
    schedule.n_rounds = std::max(n_rounds, 0);
    if (n_rounds < 1 || !(shift_prob >= 0.0 && shift_prob <= 1.0) || min_gap < 1) {
        return schedule;
    }

    Rng rng(seed);
    const auto& catalogue = regime_catalogue();
    Regime current;
    int last_shift = 0;
    bool any_shift = false;
    for (int round = 1; round <= n_rounds; ++round) {
        if (!rng.bernoulli(shift_prob)) continue;
        const Regime candidate = catalogue[rng.index(catalogue.size())];
        const bool spaced = !any_shift || round - last_shift >= min_gap;
        if (!spaced || candidate == current) continue;
        schedule.entries.push_back({round, candidate});
        current = candidate;
        last_shift = round;
        any_shift = true;
    }
    return schedule;
}

void apply_regime(const Regime& regime, std::span<double> features) {
    if (regime.is_identity() || features.empty()) return;
    switch (regime.kind) {
        case CorruptionKind::none:
            return;
        case CorruptionKind::shift_mean: {
            // Fixed unit direction (e0 + e1) / sqrt(2).
            const double step = mean_shift_for(regime.severity) / std::numbers::sqrt2;
            features[0] += step;
            if (features.size() > 1) features[1] += step;
            return;
        }
        case CorruptionKind::scale: {
            const double factor = 1.0 + 0.15 * regime.severity / 3.0;
            for (double& v : features) v *= factor;
            return;
        }
        case CorruptionKind::rotate_pair: {
            if (features.size() < 2) return;
            const double angle = regime.severity * 6.0 * std::numbers::pi / 180.0;
            const double c = std::cos(angle);
            const double s = std::sin(angle);
            const double a = features[0];
            const double b = features[1];
            features[0] = c * a - s * b;
            features[1] = s * a + c * b;
            return;
        }
    }
}

Sample draw_base_sample(int label, int dim, Rng& rng) {
    Sample sample;
    sample.label = label;
    sample.features.resize(static_cast<std::size_t>(dim));
    for (double& v : sample.features) v = rng.normal();
    if (label == 1 && dim > 0) sample.features[0] += kAnomalyOffset;
    return sample;
}

Batch next_batch(const ShiftSchedule& schedule, int round, int batch_size, double anomaly_rate,
                 int dim, Rng& rng) {
    Batch batch;
    batch.round = round;
    batch.samples.reserve(static_cast<std::size_t>(std::max(batch_size, 0)));
    const Regime regime = schedule.regime_at(round);
    for (int j = 0; j < batch_size; ++j) {
        const int label = rng.bernoulli(anomaly_rate) ? 1 : 0;
        Sample sample = draw_base_sample(label, dim, rng);
        apply_regime(regime, sample.features);
        sample.round = round;
        sample.index_in_batch = j;
        batch.samples.push_back(std::move(sample));
    }
    return batch;
}

std::vector<Batch> ingest_stream(std::istream& in, int batch_size) {
    if (batch_size < 1) throw std::invalid_argument("batch_size must be positive");

    std::vector<Batch> batches;
    std::string line;
    std::size_t line_no = 0;
    std::size_t expected_columns = 0;
    bool first_content_line = true;
    int sample_count = 0;

    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) continue;
        const auto fields = split_fields(line);

        std::vector<double> values(fields.size());
        std::size_t numeric = 0;
        for (std::size_t k = 0; k < fields.size(); ++k) {
            if (parse_double(fields[k], values[k])) ++numeric;
        }
        if (first_content_line) {
            first_content_line = false;
            if (numeric == 0) continue;  // header
        }
        if (fields.size() < 2) throw ParseError(line_no, "expected at least one feature and a label");
        if (expected_columns == 0) expected_columns = fields.size();
        if (fields.size() != expected_columns) {
            throw DimensionError("line " + std::to_string(line_no) + ": expected " +
                                 std::to_string(expected_columns) + " columns, found " +
                                 std::to_string(fields.size()));
        }
        for (std::size_t k = 0; k < fields.size(); ++k) {
            if (!parse_double(fields[k], values[k])) {
                throw ParseError(line_no, "non-numeric value '" + std::string(fields[k]) +
                                              "' in column " + std::to_string(k + 1));
            }
        }
        const double label = values.back();
        if (label != 0.0 && label != 1.0) {
            throw ParseError(line_no, "label must be 0 or 1");
        }

        if (sample_count % batch_size == 0) {
            batches.push_back(Batch{static_cast<int>(batches.size()) + 1, {}});
        }
        Batch& batch = batches.back();
        Sample sample;
        sample.features.assign(values.begin(), values.end() - 1);
        sample.label = static_cast<int>(label);
        sample.round = batch.round;
        sample.index_in_batch = static_cast<int>(batch.samples.size());
        batch.samples.push_back(std::move(sample));
        ++sample_count;
    }
    return batches;
}

std::vector<Batch> ingest_stream(const std::filesystem::path& path, int batch_size) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    return ingest_stream(in, batch_size);
}

}  // namespace oclads
