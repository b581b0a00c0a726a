#include "oclads/server.hpp"

#include <algorithm>
#include <cmath>

namespace oclads {

void ReplayBuffer::move_position(std::size_t slot, int from, int to) {
    auto& src = positions_[from];
    const std::size_t at = position_index_[slot];
    const std::size_t moved = src.back();
    src[at] = moved;
    position_index_[moved] = at;
    src.pop_back();
    position_index_[slot] = positions_[to].size();
    positions_[to].push_back(slot);
}

void ReplayBuffer::insert(const Sample& sample) {
    if (capacity_ == 0) return;
    const int label = sample.label == 1 ? 1 : 0;
    if (items_.size() < capacity_) {
        position_index_.push_back(positions_[label].size());
        positions_[label].push_back(items_.size());
        items_.push_back(sample);
        return;
    }
    const int majority = majority_label();
    const auto& candidates = positions_[majority];
    const std::size_t slot = candidates[rng_.index(candidates.size())];
    const int evicted = items_[slot].label == 1 ? 1 : 0;
    items_[slot] = sample;
    if (evicted != label) move_position(slot, evicted, label);
}

void ReplayBuffer::insert(std::span<const Sample> samples) {
    for (const auto& s : samples) insert(s);
}

std::string to_string(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::oclads:
            return "oclads";
        case PolicyKind::all_update:
            return "all_update";
        case PolicyKind::random_update:
            return "random_update";
        case PolicyKind::oracle:
            return "oracle_oclads";
        case PolicyKind::no_update:
            return "no_update";
    }
    return "oclads";
}

PolicyKind policy_kind_from_string(const std::string& name) {
    for (PolicyKind kind : all_policies()) {
        if (to_string(kind) == name) return kind;
    }
    throw std::invalid_argument("unknown policy: " + name);
}

const std::vector<PolicyKind>& all_policies() {
    static const std::vector<PolicyKind> policies = {
        PolicyKind::oclads, PolicyKind::all_update, PolicyKind::random_update, PolicyKind::oracle,
        PolicyKind::no_update};
    return policies;
}

std::set<int> make_random_schedule(int n_rounds, int n_updates, int calibration_rounds, Rng& rng) {
    const int span_rounds = n_rounds - calibration_rounds;
    if (n_updates < 0 || n_updates > std::max(span_rounds, 0)) {
        throw std::invalid_argument("cannot place " + std::to_string(n_updates) +
                                    " updates in " + std::to_string(std::max(span_rounds, 0)) +
                                    " post-calibration rounds");
    }
    std::set<int> schedule;
    for (int s = 0; s < n_updates; ++s) {
        // Segments are disjoint, so one draw per segment never collides.
        const int lo = calibration_rounds + 1 +
                       static_cast<int>(static_cast<long long>(s) * span_rounds / n_updates);
        const int hi = calibration_rounds +
                       static_cast<int>(static_cast<long long>(s + 1) * span_rounds / n_updates);
        const double mid = 0.5 * (lo + hi);
        const double sigma = (hi - lo + 1) / 4.0;
        const auto drawn = static_cast<int>(std::lround(mid + sigma * rng.normal()));
        schedule.insert(std::clamp(drawn, lo, hi));
    }
    return schedule;
}

Server::Server(ModelParams initial_model, UpdatePolicy policy, ServerConfig config,
               std::uint64_t buffer_seed, std::uint64_t train_seed)
    : master_(std::move(initial_model)),
      policy_(std::move(policy)),
      config_(config),
      buffer_(config.buffer_capacity, buffer_seed),
      train_rng_(train_seed) {}

bool Server::runs_shift_test() const {
    return config_.test_all_policies || policy_.kind == PolicyKind::oclads;
}

bool Server::should_transmit(int round, const std::optional<ShiftVerdict>& verdict) const {
    const bool warm_up = round <= config_.calibration_rounds;
    switch (policy_.kind) {
        case PolicyKind::oclads:
            return warm_up || (verdict && verdict->shift_detected);
        case PolicyKind::all_update:
            return true;
        case PolicyKind::random_update:
        case PolicyKind::oracle:
            return warm_up || policy_.rounds.contains(round);
        case PolicyKind::no_update:
            return false;
    }
    return false;
}

RoundOutcome Server::process_round(const UplinkPayload& payload) {
    if (payload.round <= last_round_) {
        throw RoundOrderError("round " + std::to_string(payload.round) + " received after round " +
                              std::to_string(last_round_));
    }
    RoundOutcome outcome;
    outcome.round = payload.round;

    if (runs_shift_test() && !last_received_.empty() && !payload.selected.empty()) {
        FeatureMatrix training;
        for (const auto& s : buffer_.items()) {
            if (s.round != last_round_) training.append(s.features);
        }
        if (training.rows() >= 2) {
            outcome.testable = true;
            const auto scorer = fit_scorer(training, config_.scorer);
            ShiftTestConfig cfg = config_.test;
            cfg.seed = mix_seed(config_.test.seed, static_cast<std::uint64_t>(payload.round));
            outcome.verdict =
                permutation_test(*scorer, FeatureMatrix::from_samples(last_received_),
                                 FeatureMatrix::from_samples(payload.selected), cfg);
        }
    }

    buffer_.insert(payload.selected);
    if (buffer_.size() > 0) {
        master_ = train_replay_steps(master_, payload.selected, buffer_.items(), config_.train,
                                     train_rng_);
    }

    if (should_transmit(payload.round, outcome.verdict)) {
        outcome.downlink = serialize_model(master_);
    }

    last_received_ = payload.selected;
    last_round_ = payload.round;
    return outcome;
}

}  // namespace oclads
