#pragma once

#include <cstdint>
#include <filesystem>
#include <istream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "oclads/random.hpp"
#include "oclads/sample.hpp"

namespace oclads {

enum class CorruptionKind { none, shift_mean, scale, rotate_pair };

std::string to_string(CorruptionKind kind);
CorruptionKind corruption_kind_from_string(const std::string& name);

// Covariate regime applied to every sample of a batch. Severity 0 is the
// identity whatever the kind says.
struct Regime {
    CorruptionKind kind = CorruptionKind::none;
    int severity = 0;  // one of 0, 3, 5

    bool is_identity() const { return severity == 0; }

    friend bool operator==(const Regime& a, const Regime& b) {
        if (a.is_identity() || b.is_identity()) {
            return a.is_identity() && b.is_identity();
        }
        return a.kind == b.kind && a.severity == b.severity;
    }
};

// The seven distinct regimes a candidate shift can draw from.
const std::vector<Regime>& regime_catalogue();

struct ScheduleEntry {
    int round = 0;
    Regime regime;
};

struct ShiftSchedule {
    int n_rounds = 0;
    std::vector<ScheduleEntry> entries;

    // Regime active at `round`: the last entry with entry.round <= round,
    // or the identity regime before the first entry.
    Regime regime_at(int round) const;

    // Rounds at which the active regime changes between two consecutive
    // batches. An entry at round 1 sets the starting regime and is not a
    // transition.
    std::vector<int> shift_rounds() const;

    std::string to_json() const;
    static ShiftSchedule from_json(const std::string& text);
};

ShiftSchedule build_schedule(int n_rounds, double shift_prob, int min_gap, std::uint64_t seed);

struct StreamConfig {
    int dim = 16;
    int batch_size = 64;
    double anomaly_rate = 0.07;
};

// Distance of the anomaly cluster centre from the origin.
inline constexpr double kAnomalyOffset = 3.0;

// Applies the regime's covariate transform in place.
void apply_regime(const Regime& regime, std::span<double> features);

// One base draw: isotropic unit Gaussian around 0 (normal) or around
// kAnomalyOffset * e0 (anomaly).
Sample draw_base_sample(int label, int dim, Rng& rng);

Batch next_batch(const ShiftSchedule& schedule, int round, int batch_size, double anomaly_rate,
                 int dim, Rng& rng);

// Sequential generator over rounds 1..schedule.n_rounds.
class SyntheticStream {
  public:
    SyntheticStream(ShiftSchedule schedule, StreamConfig config, std::uint64_t seed)
        : schedule_(std::move(schedule)), config_(config), rng_(seed) {}

    Batch next(int round) {
        return next_batch(schedule_, round, config_.batch_size, config_.anomaly_rate, config_.dim,
                          rng_);
    }

    const ShiftSchedule& schedule() const { return schedule_; }

  private:
    ShiftSchedule schedule_;
    StreamConfig config_;
    Rng rng_;
};

class ParseError : public std::runtime_error {
  public:
    ParseError(std::size_t line, const std::string& what)
        : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const { return line_; }

  private:
    std::size_t line_;
};

// Reads a CSV of `features..., label` rows (header optional) and splits it
// into consecutive batches; the last batch may be short.
std::vector<Batch> ingest_stream(const std::filesystem::path& path, int batch_size);
std::vector<Batch> ingest_stream(std::istream& in, int batch_size);

}  // namespace oclads
